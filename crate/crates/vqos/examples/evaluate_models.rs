//! Evaluate a (briefly trained) GAN and baseline on the test split and print
//! the comparison table plus confusion matrices.

use vqos::corpus::{build_corpus, CorpusConfig, Split};
use vqos::eval::evaluate;
use vqos::model::{baseline_train, train_gan, BaselineModel, GanModel, TrainConfig};

fn main() {
    let dir = std::env::temp_dir().join("vqos_evaluate_example");
    let _ = std::fs::remove_dir_all(&dir);

    let corpus_cfg = CorpusConfig { frames: 15, ..CorpusConfig::default() };
    let manifest = build_corpus(&corpus_cfg, &dir.join("corpus")).unwrap();

    let cfg = TrainConfig { epochs: 2, batch: 8, ..TrainConfig::default() };
    let (gan_ckpt, _) = train_gan(&cfg, &manifest, &dir.join("run")).unwrap();
    let (cnn_ckpt, _) = baseline_train(&cfg, &manifest, &dir.join("run")).unwrap();

    let gan = GanModel::load(&gan_ckpt).unwrap();
    let cnn = BaselineModel::load(&cnn_ckpt).unwrap();
    let report = evaluate(Some(&gan), Some(&cnn), &manifest, Split::Test, &dir.join("report")).unwrap();

    for m in &report.models {
        println!("{}", m.confusion_rate.render_table(&format!("{} rate", m.model_kind)));
    }
    println!("{}", report.comparison_csv());
    println!(
        "mean PSNR: degraded {:.2} dB, reconstructed {:.2} dB",
        report.mean_degraded_psnr,
        report.mean_reconstructed_psnr.unwrap()
    );
    println!("artifacts in {}", dir.join("report").display());
}
