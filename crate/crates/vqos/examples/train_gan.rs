//! Short adversarial training run on a small corpus, printing the per-epoch
//! metrics the full trainer writes to CSV.

use vqos::corpus::{build_corpus, CorpusConfig};
use vqos::model::{train_gan, TrainConfig};

fn main() {
    let dir = std::env::temp_dir().join("vqos_train_gan_example");
    let _ = std::fs::remove_dir_all(&dir);

    let corpus_cfg = CorpusConfig { frames: 12, ..CorpusConfig::default() };
    let manifest = build_corpus(&corpus_cfg, &dir.join("corpus")).unwrap();

    let cfg = TrainConfig { epochs: 3, batch: 8, ..TrainConfig::default() };
    let (ckpt, history) = train_gan(&cfg, &manifest, &dir.join("run")).unwrap();

    println!("{:>5} {:>10} {:>10} {:>9} {:>9} {:>9}", "epoch", "disc_loss", "gen_loss", "rate_acc", "loss_acc", "psnr");
    for e in &history {
        println!(
            "{:>5} {:>10.4} {:>10.4} {:>9.3} {:>9.3} {:>9.2}",
            e.epoch, e.disc_loss, e.gen_loss, e.rate_acc, e.loss_acc, e.recon_psnr
        );
    }
    println!("checkpoint: {}", ckpt.display());
}
