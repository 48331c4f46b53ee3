//! Reconstruct a degraded frame with the generator and compare PSNR before
//! and after, with both predicted and explicit condition labels.

use vqos::corpus::{build_corpus, load_batch, psnr, CorpusConfig, Split};
use vqos::model::{reconstruct, train_gan, GanModel, TrainConfig};

fn main() {
    let dir = std::env::temp_dir().join("vqos_reconstruct_example");
    let _ = std::fs::remove_dir_all(&dir);

    let corpus_cfg = CorpusConfig { frames: 12, ..CorpusConfig::default() };
    let manifest = build_corpus(&corpus_cfg, &dir.join("corpus")).unwrap();

    let cfg = TrainConfig { epochs: 5, batch: 8, ..TrainConfig::default() };
    let (ckpt, _) = train_gan(&cfg, &manifest, &dir.join("run")).unwrap();
    let model = GanModel::load(&ckpt).unwrap();

    let sample = load_batch(&manifest, Split::Test, 1, 0).unwrap().remove(0).0.remove(0);

    let (auto_recon, used) = reconstruct(&model, &sample.recv, None).unwrap();
    let (true_recon, _) = reconstruct(&model, &sample.recv, Some(sample.state)).unwrap();

    println!("condition: {} kbps / loss {}", sample.state.rate_kbps, sample.state.loss_class);
    println!("labels used for auto reconstruction: {} kbps / loss {}", used.rate_kbps, used.loss_class);
    println!("PSNR degraded vs original:            {:.2} dB", psnr(&sample.org, &sample.recv).unwrap());
    println!("PSNR reconstructed (predicted labels): {:.2} dB", psnr(&sample.org, &auto_recon).unwrap());
    println!("PSNR reconstructed (true labels):      {:.2} dB", psnr(&sample.org, &true_recon).unwrap());

    let out = dir.join("reconstructed.pgm");
    auto_recon.write_pgm(&out).unwrap();
    println!("wrote {}", out.display());
}
