//! Predict the network state of a degraded frame with a (briefly trained)
//! discriminator, printing per-class probabilities.

use vqos::corpus::{build_corpus, load_batch, CorpusConfig, Split};
use vqos::model::{predict, train_gan, GanModel, TrainConfig};

fn main() {
    let dir = std::env::temp_dir().join("vqos_predict_example");
    let _ = std::fs::remove_dir_all(&dir);

    let corpus_cfg = CorpusConfig { frames: 12, ..CorpusConfig::default() };
    let manifest = build_corpus(&corpus_cfg, &dir.join("corpus")).unwrap();

    let cfg = TrainConfig { epochs: 3, batch: 8, ..TrainConfig::default() };
    let (ckpt, _) = train_gan(&cfg, &manifest, &dir.join("run")).unwrap();
    let model = GanModel::load(&ckpt).unwrap();

    let sample = load_batch(&manifest, Split::Test, 1, 0).unwrap().remove(0).0.remove(0);
    let p = predict(&model, &sample.recv).unwrap();

    println!("true state: {} kbps / loss {}", sample.state.rate_kbps, sample.state.loss_class);
    println!("predicted:  {} kbps / loss {}", p.state.rate_kbps, p.state.loss_class);
    for (c, pr) in model.classes.rates.iter().zip(&p.rate_probs) {
        println!("  P(rate = {c:>5} kbps) = {pr:.3}");
    }
    for (c, pr) in model.classes.losses.iter().zip(&p.loss_probs) {
        println!("  P(loss = {c:>5}) = {pr:.3}");
    }
    println!("validity score: {:.3}", p.validity.unwrap());
}
