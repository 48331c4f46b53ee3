//! Train the paired-input baseline CNN for a few epochs.

use vqos::corpus::{build_corpus, CorpusConfig};
use vqos::model::{baseline_train, BaselineModel, TrainConfig};

fn main() {
    let dir = std::env::temp_dir().join("vqos_train_baseline_example");
    let _ = std::fs::remove_dir_all(&dir);

    let corpus_cfg = CorpusConfig { frames: 12, ..CorpusConfig::default() };
    let manifest = build_corpus(&corpus_cfg, &dir.join("corpus")).unwrap();

    let cfg = TrainConfig { epochs: 3, batch: 8, ..TrainConfig::default() };
    let (ckpt, history) = baseline_train(&cfg, &manifest, &dir.join("run")).unwrap();

    println!("{:>5} {:>10} {:>9} {:>9} {:>9}", "epoch", "loss", "rate_acc", "loss_acc", "joint");
    for e in &history {
        println!("{:>5} {:>10.4} {:>9.3} {:>9.3} {:>9.3}", e.epoch, e.loss, e.rate_acc, e.loss_acc, e.joint_acc);
    }
    let model = BaselineModel::load(&ckpt).unwrap();
    println!("checkpoint: {} ({} parameters)", ckpt.display(), model.cnn.param_count());
}
