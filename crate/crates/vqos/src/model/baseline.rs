//! Paired-input baseline: a CNN that needs both the original and the
//! received frame to classify the network state.

use super::arch::{frames_tensor, label_indices, paired_tensor, ModelShape, PairedCnn};
use super::checkpoint::{assign_params, load_checkpoint, save_checkpoint, CheckpointMeta};
use super::train::{argmax, Prediction, TrainConfig};
use crate::corpus::{CorpusData, CorpusManifest, Frame, Split};
use crate::emulator::ClassSets;
use crate::error::{Result, VqosError};
use crate::seed::derive_seed;
use crate::tensor::{AdamState, Graph, Tensor};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const BASELINE_KIND: &str = "baseline_cnn";
pub const BASELINE_METRICS_HEADER: &str = "epoch,loss,rate_acc,loss_acc,joint_acc";

#[derive(Debug, Clone)]
pub struct BaselineModel {
    pub cnn: PairedCnn,
    pub classes: ClassSets,
    pub meta: CheckpointMeta,
}

impl BaselineModel {
    pub fn new(width: usize, height: usize, classes: ClassSets, seed: u64, corpus_hash: u32) -> Result<Self> {
        classes.validate()?;
        // latent is unused by the trunk; recorded as 0 in metadata
        let shape = ModelShape::new(width, height, &classes, 1)?;
        let meta = CheckpointMeta {
            model_kind: BASELINE_KIND.into(),
            width,
            height,
            latent: 0,
            classes: classes.clone(),
            corpus_hash,
            seed,
            param_count: 0,
        };
        Ok(BaselineModel { cnn: PairedCnn::new(shape, derive_seed(seed, 3, 0, 0)), classes, meta })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        save_checkpoint(path, &self.meta, &self.cnn.params())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (meta, params) = load_checkpoint(path)?;
        if meta.model_kind != BASELINE_KIND {
            return Err(VqosError::Checkpoint(format!(
                "{} holds a '{}' model, expected '{BASELINE_KIND}'",
                path.display(),
                meta.model_kind
            )));
        }
        let mut model = BaselineModel::new(meta.width, meta.height, meta.classes.clone(), meta.seed, meta.corpus_hash)?;
        let expect: Vec<(String, Tensor)> = model.cnn.params().iter().map(|(n, t)| (n.clone(), (*t).clone())).collect();
        assign_params(
            params,
            expect.iter().map(|(n, t)| (n.clone(), t)).collect(),
            model.cnn.params_mut(),
        )?;
        model.meta = meta;
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineEpoch {
    pub epoch: usize,
    pub loss: f64,
    pub rate_acc: f64,
    pub loss_acc: f64,
    pub joint_acc: f64,
}

impl BaselineEpoch {
    pub fn csv_row(&self) -> String {
        format!("{},{:.6},{:.6},{:.6},{:.6}", self.epoch, self.loss, self.rate_acc, self.loss_acc, self.joint_acc)
    }
}

/// Cross-entropy training on (original, received) pairs. Mirrors the GAN
/// trainer's artifacts: metrics CSV plus interval/final checkpoints.
pub fn baseline_train(cfg: &TrainConfig, manifest: &CorpusManifest, out_dir: &Path) -> Result<(PathBuf, Vec<BaselineEpoch>)> {
    cfg.validate()?;
    let cc = &manifest.header.config;
    let mut model = BaselineModel::new(cc.width, cc.height, cc.classes.clone(), cfg.seed, manifest.header.config_hash)?;
    let data = CorpusData::load(manifest, Split::Train)?;

    std::fs::create_dir_all(out_dir).map_err(|e| VqosError::io(out_dir.display().to_string(), e))?;
    let ckpt_path = out_dir.join("baseline.ckpt");
    model.save(&ckpt_path)?;

    let csv_path = out_dir.join("metrics_baseline.csv");
    let file = std::fs::File::create(&csv_path).map_err(|e| VqosError::io(csv_path.display().to_string(), e))?;
    let mut csv = std::io::BufWriter::new(file);
    writeln!(csv, "{BASELINE_METRICS_HEADER}").map_err(|e| VqosError::io(csv_path.display().to_string(), e))?;

    let mut opt = AdamState::new(cfg.lr_d);
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let epoch_seed = derive_seed(cfg.seed, epoch as u64, 1, 3);
        let (mut loss_sum, mut n_batches) = (0.0, 0usize);
        let (mut n, mut rate_ok, mut loss_ok, mut joint_ok) = (0usize, 0usize, 0usize, 0usize);
        for (batch_id, b) in data.batches(cfg.batch, epoch_seed).iter().enumerate() {
            let shifted = if cfg.augment {
                let mut arng = crate::seed::rng_for(epoch_seed, 0x617567, batch_id as u64, 0);
                Some(super::train::shift_batch(&b.recv, &b.org, cc.emulator.block, &mut arng))
            } else {
                None
            };
            let x = match &shifted {
                Some((rs, os)) => {
                    let rr: Vec<&Frame> = rs.iter().collect();
                    let or: Vec<&Frame> = os.iter().collect();
                    paired_tensor(&or, &rr)?
                }
                None => paired_tensor(&b.org, &b.recv)?,
            };
            let (rate_t, loss_t) = label_indices(&b.states, &model.classes)?;
            let mut g = Graph::new();
            let xv = g.leaf(&x);
            let ((rl, ll), bound) = model.cnn.forward(&mut g, xv, false)?;
            let ce_r = g.cross_entropy(rl, &rate_t)?;
            let ce_l = g.cross_entropy(ll, &loss_t)?;
            let summed = g.add(ce_r, ce_l)?;
            let loss = g.scale(summed, 0.5)?;
            let value = g.scalar_value(loss);
            if !value.is_finite() {
                return Err(VqosError::NonFinite(format!(
                    "baseline loss became {value} at epoch {epoch}, batch {batch_id} (lr {}); aborting",
                    opt.lr
                )));
            }
            let n_rate = model.classes.rates.len();
            let n_loss = model.classes.losses.len();
            for i in 0..b.states.len() {
                let pr = argmax(&g.data(rl)[i * n_rate..(i + 1) * n_rate]);
                let pl = argmax(&g.data(ll)[i * n_loss..(i + 1) * n_loss]);
                rate_ok += (pr == rate_t[i]) as usize;
                loss_ok += (pl == loss_t[i]) as usize;
                joint_ok += (pr == rate_t[i] && pl == loss_t[i]) as usize;
            }
            n += b.states.len();
            g.backward(loss)?;
            for t in model.cnn.params_mut() {
                t.zero_grad();
            }
            bound.write_back(&g, model.cnn.params_mut());
            opt.step(&mut model.cnn.params_mut())?;
            loss_sum += value;
            n_batches += 1;
        }
        let em = BaselineEpoch {
            epoch,
            loss: loss_sum / n_batches.max(1) as f64,
            rate_acc: rate_ok as f64 / n.max(1) as f64,
            loss_acc: loss_ok as f64 / n.max(1) as f64,
            joint_acc: joint_ok as f64 / n.max(1) as f64,
        };
        writeln!(csv, "{}", em.csv_row())
            .and_then(|_| csv.flush())
            .map_err(|e| VqosError::io(csv_path.display().to_string(), e))?;
        history.push(em);
        if epoch % cfg.checkpoint_interval == 0 && epoch != cfg.epochs {
            model.save(&out_dir.join(format!("baseline_e{epoch:03}.ckpt")))?;
        }
    }
    model.save(&ckpt_path)?;
    Ok((ckpt_path, history))
}

/// Classify the network state from an (original, received) pair.
pub fn baseline_predict(model: &BaselineModel, org: &Frame, recv: &Frame) -> Result<Prediction> {
    let _ = frames_tensor(&[org])?; // shape check with a clear error
    let x = paired_tensor(&[org], &[recv])?;
    let mut g = Graph::new();
    let xv = g.leaf(&x);
    let ((rl, ll), _) = model.cnn.forward(&mut g, xv, true)?;
    let rate_sm = g.softmax(rl)?;
    let loss_sm = g.softmax(ll)?;
    let rate_probs = g.data(rate_sm).to_vec();
    let loss_probs = g.data(loss_sm).to_vec();
    let state = model.classes.state_of(argmax(&rate_probs), argmax(&loss_probs));
    Ok(Prediction { state, rate_probs, loss_probs, validity: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_corpus, CorpusConfig};

    #[test]
    fn epoch_zero_writes_checkpoint_and_empty_metrics() {
        let dir = tempfile::tempdir().unwrap();
        let corpus_cfg = CorpusConfig { frames: 6, width: 32, height: 32, ..Default::default() };
        let manifest = build_corpus(&corpus_cfg, &dir.path().join("corpus")).unwrap();
        let cfg = TrainConfig { epochs: 0, ..TrainConfig::default() };
        let out = dir.path().join("run");
        let (ckpt, history) = baseline_train(&cfg, &manifest, &out).unwrap();
        assert!(history.is_empty());
        let loaded = BaselineModel::load(&ckpt).unwrap();
        assert!(loaded.cnn.param_count() > 0);
        let csv = std::fs::read_to_string(out.join("metrics_baseline.csv")).unwrap();
        assert_eq!(csv.trim(), BASELINE_METRICS_HEADER);
    }

    #[test]
    fn metrics_are_deterministic_per_seed() {
        let dir = tempfile::tempdir().unwrap();
        let corpus_cfg = CorpusConfig { frames: 6, width: 32, height: 32, ..Default::default() };
        let manifest = build_corpus(&corpus_cfg, &dir.path().join("corpus")).unwrap();
        let cfg = TrainConfig { epochs: 2, ..TrainConfig::default() };
        let (_, h1) = baseline_train(&cfg, &manifest, &dir.path().join("a")).unwrap();
        let (_, h2) = baseline_train(&cfg, &manifest, &dir.path().join("b")).unwrap();
        assert_eq!(h1, h2);
        let a = std::fs::read(dir.path().join("a/metrics_baseline.csv")).unwrap();
        let b = std::fs::read(dir.path().join("b/metrics_baseline.csv")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn predict_is_deterministic_and_rejects_size_mismatch() {
        let model = BaselineModel::new(64, 64, ClassSets::default(), 4, 0).unwrap();
        let f = crate::corpus::gen_video(3, 1, 64, 64, crate::corpus::Motif::GradientNoise).unwrap();
        let p1 = baseline_predict(&model, &f[0], &f[0]).unwrap();
        let p2 = baseline_predict(&model, &f[0], &f[0]).unwrap();
        assert_eq!(p1, p2);
        assert!(p1.validity.is_none());
        let small = crate::corpus::gen_video(3, 1, 32, 32, crate::corpus::Motif::GradientNoise).unwrap();
        assert!(baseline_predict(&model, &f[0], &small[0]).is_err());
    }
}
