//! Synthetic video, degradation corpus, and the manifest that ties them
//! together.

mod frame;
mod manifest;
mod video;

pub use frame::{psnr, Frame};
pub use manifest::{
    build_corpus, load_batch, Batch, CorpusConfig, CorpusData, CorpusManifest, ManifestHeader,
    ManifestRecord, Sample, Split, MANIFEST_NAME,
};
pub use video::{gen_video, Motif};
