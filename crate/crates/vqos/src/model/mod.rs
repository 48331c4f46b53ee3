//! vQoS-GAN models: conditional generator, three-headed discriminator, the
//! paired-input baseline, and their training loops.

mod arch;
mod baseline;
mod checkpoint;
mod train;

pub use arch::{
    conditioned_input, frames_tensor, label_indices, paired_tensor, Discriminator, Generator,
    ModelShape, PairedCnn,
};
pub use baseline::{baseline_predict, baseline_train, BaselineModel, BASELINE_KIND, BASELINE_METRICS_HEADER};
pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointMeta, CKPT_MAGIC, CKPT_VERSION};
pub use train::{
    argmax, predict, reconstruct, train_gan, train_step, EpochMetrics, GanModel, Prediction,
    StepMetrics, TrainConfig, GAN_KIND, GAN_METRICS_HEADER,
};
