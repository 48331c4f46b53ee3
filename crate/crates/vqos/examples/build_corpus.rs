//! Build a small degradation corpus and inspect its manifest.

use vqos::corpus::{build_corpus, CorpusConfig, CorpusManifest, Split};

fn main() {
    let dir = std::env::temp_dir().join("vqos_corpus_example");
    let _ = std::fs::remove_dir_all(&dir);

    let cfg = CorpusConfig { frames: 20, ..CorpusConfig::default() };
    let manifest = build_corpus(&cfg, &dir).unwrap();
    manifest.verify().unwrap();

    println!("corpus at {}", dir.display());
    println!("config hash: {:#010x}", manifest.header.config_hash);
    println!(
        "{} records ({} train / {} test) over {} conditions",
        manifest.records.len(),
        manifest.split_records(Split::Train).len(),
        manifest.split_records(Split::Test).len(),
        cfg.classes.conditions().len()
    );

    // reloading from disk gives the same manifest
    let reloaded = CorpusManifest::load(&dir).unwrap();
    assert_eq!(manifest.records, reloaded.records);
    for r in reloaded.records.iter().take(3) {
        println!("{} <- {} [{:?}] rate {} loss {}", r.degraded, r.original, r.split, r.rate, r.loss);
    }
}
