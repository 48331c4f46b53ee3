//! Adversarial training loop, prediction, and reconstruction.

use super::arch::{conditioned_input, frames_tensor, label_indices, Discriminator, Generator, ModelShape};
use super::checkpoint::{assign_params, load_checkpoint, save_checkpoint, CheckpointMeta};
use crate::corpus::{psnr, CorpusData, CorpusManifest, Frame, Split};
use crate::emulator::{ClassSets, NetworkState};
use crate::error::{Result, VqosError};
use crate::seed::derive_seed;
use crate::tensor::{AdamState, Graph, Tensor, Var};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const GAN_KIND: &str = "vqos_gan";

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch: usize,
    pub lr_g: f64,
    pub lr_d: f64,
    pub lambda_adv: f64,
    pub lambda_rec: f64,
    pub lambda_cls: f64,
    pub latent: usize,
    pub seed: u64,
    pub checkpoint_interval: usize,
    /// Random block-aligned circular shifts of each training pair. The
    /// degradation statistics are invariant under them (artifacts stay on
    /// the block grid, labels unchanged), so this removes the incentive to
    /// memorize individual frames without distorting the task.
    pub augment: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 45,
            batch: 16,
            lr_g: 2e-3,
            lr_d: 1e-3,
            lambda_adv: 0.05,
            lambda_rec: 1.0,
            // kept small: the classification heads read degradation
            // signatures, so a large weight rewards the generator for
            // re-introducing the very artifacts reconstruction removes
            lambda_cls: 0.1,
            latent: 256,
            seed: 1,
            checkpoint_interval: 10,
            augment: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch == 0 {
            return Err(VqosError::InvalidArgument("batch size must be positive".into()));
        }
        if self.lambda_adv < 0.0 || self.lambda_cls < 0.0 {
            return Err(VqosError::InvalidArgument("loss weights must be non-negative".into()));
        }
        if self.lambda_rec <= 0.0 {
            return Err(VqosError::InvalidArgument("lambda_rec must be positive".into()));
        }
        if self.lr_g <= 0.0 || self.lr_d <= 0.0 {
            return Err(VqosError::InvalidArgument("learning rates must be positive".into()));
        }
        if self.checkpoint_interval == 0 {
            return Err(VqosError::InvalidArgument("checkpoint interval must be positive".into()));
        }
        Ok(())
    }
}

/// Generator + discriminator pair plus the metadata that travels with them.
#[derive(Debug, Clone)]
pub struct GanModel {
    pub gen: Generator,
    pub disc: Discriminator,
    pub classes: ClassSets,
    pub meta: CheckpointMeta,
}

impl GanModel {
    pub fn new(width: usize, height: usize, classes: ClassSets, latent: usize, seed: u64, corpus_hash: u32) -> Result<Self> {
        classes.validate()?;
        let shape = ModelShape::new(width, height, &classes, latent)?;
        let meta = CheckpointMeta {
            model_kind: GAN_KIND.into(),
            width,
            height,
            latent,
            classes: classes.clone(),
            corpus_hash,
            seed,
            param_count: 0,
        };
        Ok(GanModel {
            gen: Generator::new(shape, derive_seed(seed, 1, 0, 0)),
            disc: Discriminator::new(shape, derive_seed(seed, 2, 0, 0)),
            classes,
            meta,
        })
    }

    fn all_params(&self) -> Vec<(String, &Tensor)> {
        let mut p = self.gen.params();
        p.extend(self.disc.params());
        p
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        save_checkpoint(path, &self.meta, &self.all_params())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (meta, params) = load_checkpoint(path)?;
        if meta.model_kind != GAN_KIND {
            return Err(VqosError::Checkpoint(format!(
                "{} holds a '{}' model, expected '{GAN_KIND}'",
                path.display(),
                meta.model_kind
            )));
        }
        let mut model = GanModel::new(meta.width, meta.height, meta.classes.clone(), meta.latent, meta.seed, meta.corpus_hash)?;
        let n_gen = model.gen.params().len();
        let expect = model.all_params();
        let expect_owned: Vec<(String, Tensor)> = expect.iter().map(|(n, t)| (n.clone(), (*t).clone())).collect();
        drop(expect);
        let (gen_loaded, disc_loaded): (Vec<_>, Vec<_>) = {
            let mut it = params.into_iter();
            let g: Vec<_> = it.by_ref().take(n_gen).collect();
            (g, it.collect())
        };
        assign_params(
            gen_loaded,
            expect_owned[..n_gen].iter().map(|(n, t)| (n.clone(), t)).collect(),
            model.gen.params_mut(),
        )?;
        assign_params(
            disc_loaded,
            expect_owned[n_gen..].iter().map(|(n, t)| (n.clone(), t)).collect(),
            model.disc.params_mut(),
        )?;
        model.meta = meta;
        Ok(model)
    }
}

/// Per-step training measurements, summed into epoch metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMetrics {
    pub disc_loss: f64,
    pub gen_loss: f64,
    pub gen_adv: f64,
    pub gen_rec: f64,
    pub gen_cls: f64,
    pub n: usize,
    pub rate_correct: usize,
    pub loss_correct: usize,
    pub joint_correct: usize,
    pub psnr_sum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub disc_loss: f64,
    pub gen_loss: f64,
    pub gen_adv: f64,
    pub gen_rec: f64,
    pub gen_cls: f64,
    pub rate_acc: f64,
    pub loss_acc: f64,
    pub joint_acc: f64,
    pub recon_psnr: f64,
}

pub const GAN_METRICS_HEADER: &str =
    "epoch,disc_loss,gen_loss,gen_adv,gen_rec,gen_cls,rate_acc,loss_acc,joint_acc,recon_psnr";

impl EpochMetrics {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            self.epoch,
            self.disc_loss,
            self.gen_loss,
            self.gen_adv,
            self.gen_rec,
            self.gen_cls,
            self.rate_acc,
            self.loss_acc,
            self.joint_acc,
            self.recon_psnr
        )
    }
}

pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

fn ensure_finite(value: f64, what: &str, epoch: usize, batch_id: usize, lr: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(VqosError::NonFinite(format!(
            "{what} became {value} at epoch {epoch}, batch {batch_id} (lr {lr}); aborting"
        )));
    }
    Ok(value)
}

/// Generator forward + full generator loss on an already-built graph.
/// Shared by the training step and the finite-difference test oracle.
pub(crate) struct GenLossParts {
    pub recon: Var,
    pub adv: Var,
    pub rec: Var,
    pub cls: Var,
    pub total: Var,
    pub bound: super::arch::Bound,
}

pub(crate) fn gen_loss_graph(
    g: &mut Graph,
    model: &GanModel,
    x_cond: &Tensor,
    x_org: &Tensor,
    rate_t: &[usize],
    loss_t: &[usize],
    cfg: &TrainConfig,
    frozen_gen: bool,
) -> Result<GenLossParts> {
    let n = x_cond.shape[0];
    let cond_v = g.leaf(x_cond);
    let (recon, bound) = model.gen.forward(g, cond_v, frozen_gen)?;
    let (d_out, _) = model.disc.forward(g, recon, true)?;
    let ones = vec![1.0; n];
    let adv = g.bce(d_out.validity, &ones)?;
    let org_v = g.constant(x_org.shape.clone(), x_org.data.clone())?;
    let rec = g.l1(recon, org_v)?;
    let ce_r = g.cross_entropy(d_out.rate_logits, rate_t)?;
    let ce_l = g.cross_entropy(d_out.loss_logits, loss_t)?;
    let cls = g.add(ce_r, ce_l)?;
    let wa = g.scale(adv, cfg.lambda_adv)?;
    let wr = g.scale(rec, cfg.lambda_rec)?;
    let wc = g.scale(cls, cfg.lambda_cls)?;
    let partial = g.add(wa, wr)?;
    let total = g.add(partial, wc)?;
    Ok(GenLossParts { recon, adv, rec, cls, total, bound })
}

/// One discriminator update followed by one generator update.
#[allow(clippy::too_many_arguments)]
pub fn train_step(
    model: &mut GanModel,
    opt_g: &mut AdamState,
    opt_d: &mut AdamState,
    recv: &[&Frame],
    org: &[&Frame],
    states: &[NetworkState],
    cfg: &TrainConfig,
    epoch: usize,
    batch_id: usize,
) -> Result<StepMetrics> {
    let n = recv.len();
    let classes = model.classes.clone();
    let x_cond = conditioned_input(recv, states, &classes)?;
    let x_recv = frames_tensor(recv)?;
    let x_org = frames_tensor(org)?;
    let (rate_t, loss_t) = label_indices(states, &classes)?;

    // ---- discriminator update ----
    // Disc_loss = 1/2 [BCE(val(real), 1) + CE(rate | recv) + CE(loss | recv)]
    //           + 1/2  BCE(val(G(recv, label) detached), 0)
    let mut g = Graph::new();
    let cond_v = g.leaf(&x_cond);
    let (fake, _) = model.gen.forward(&mut g, cond_v, true)?;
    let dbound = model.disc.bind(&mut g, false);
    let org_v = g.leaf(&x_org);
    let recv_v = g.leaf(&x_recv);
    let out_org = model.disc.forward_bound(&mut g, org_v, &dbound)?;
    let out_recv = model.disc.forward_bound(&mut g, recv_v, &dbound)?;
    let out_fake = model.disc.forward_bound(&mut g, fake, &dbound)?;
    let ones = vec![1.0; n];
    let zeros = vec![0.0; n];
    let real_val = g.bce(out_org.validity, &ones)?;
    let ce_rate = g.cross_entropy(out_recv.rate_logits, &rate_t)?;
    let ce_loss = g.cross_entropy(out_recv.loss_logits, &loss_t)?;
    let fake_val = g.bce(out_fake.validity, &zeros)?;
    let real_side = {
        let s = g.add(real_val, ce_rate)?;
        g.add(s, ce_loss)?
    };
    let half_real = g.scale(real_side, 0.5)?;
    let half_fake = g.scale(fake_val, 0.5)?;
    let d_loss = g.add(half_real, half_fake)?;
    let disc_loss = ensure_finite(g.scalar_value(d_loss), "disc loss", epoch, batch_id, opt_d.lr)?;

    // classification accuracy on this batch, measured pre-update
    let mut rate_correct = 0;
    let mut loss_correct = 0;
    let mut joint_correct = 0;
    let n_rate = classes.rates.len();
    let n_loss = classes.losses.len();
    for i in 0..n {
        let pr = argmax(&g.data(out_recv.rate_logits)[i * n_rate..(i + 1) * n_rate]);
        let pl = argmax(&g.data(out_recv.loss_logits)[i * n_loss..(i + 1) * n_loss]);
        let (okr, okl) = (pr == rate_t[i], pl == loss_t[i]);
        rate_correct += okr as usize;
        loss_correct += okl as usize;
        joint_correct += (okr && okl) as usize;
    }

    g.backward(d_loss)?;
    for t in model.disc.params_mut() {
        t.zero_grad();
    }
    dbound.write_back(&g, model.disc.params_mut());
    opt_d.step(&mut model.disc.params_mut())?;
    drop(g);

    // ---- generator update ----
    // Gen_loss = λ_adv BCE(val(G), 1) + λ_rec L1(G, org) + λ_cls [CE_rate + CE_loss]
    let mut g = Graph::new();
    let parts = gen_loss_graph(&mut g, model, &x_cond, &x_org, &rate_t, &loss_t, cfg, false)?;
    let gen_loss = ensure_finite(g.scalar_value(parts.total), "gen loss", epoch, batch_id, opt_g.lr)?;
    let gen_adv = g.scalar_value(parts.adv);
    let gen_rec = g.scalar_value(parts.rec);
    let gen_cls = g.scalar_value(parts.cls);

    let mut psnr_sum = 0.0;
    let spatial = model.meta.width * model.meta.height;
    for (i, o) in org.iter().enumerate() {
        let recon_px = &g.data(parts.recon)[i * spatial..(i + 1) * spatial];
        let rf = Frame::new(model.meta.width, model.meta.height, 1, recon_px.to_vec())?;
        psnr_sum += psnr(o, &rf)?;
    }

    g.backward(parts.total)?;
    for t in model.gen.params_mut() {
        t.zero_grad();
    }
    parts.bound.write_back(&g, model.gen.params_mut());
    opt_g.step(&mut model.gen.params_mut())?;

    Ok(StepMetrics {
        disc_loss,
        gen_loss,
        gen_adv,
        gen_rec,
        gen_cls,
        n,
        rate_correct,
        loss_correct,
        joint_correct,
        psnr_sum,
    })
}

/// Apply one random block-aligned circular shift per sample, identical for
/// the received and original frame of the pair.
pub(crate) fn shift_batch(
    recv: &[&Frame],
    org: &[&Frame],
    block: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> (Vec<Frame>, Vec<Frame>) {
    use rand::Rng;
    let block = block.max(1);
    let mut rs = Vec::with_capacity(recv.len());
    let mut os = Vec::with_capacity(org.len());
    for (r, o) in recv.iter().zip(org.iter()) {
        let nx = (r.width / block).max(1);
        let ny = (r.height / block).max(1);
        let dx = block * rng.gen_range(0..nx);
        let dy = block * rng.gen_range(0..ny);
        rs.push(r.circular_shift(dx, dy));
        os.push(o.circular_shift(dx, dy));
    }
    (rs, os)
}

fn write_line(f: &mut std::io::BufWriter<std::fs::File>, path: &Path, line: &str) -> Result<()> {
    writeln!(f, "{line}")
        .and_then(|_| f.flush())
        .map_err(|e| VqosError::io(path.display().to_string(), e))
}

/// Full training run: per-epoch metrics CSV (flushed as it goes) plus
/// checkpoints at every interval and at the end. `epochs = 0` writes the
/// initial checkpoint and an empty-bodied CSV.
pub fn train_gan(cfg: &TrainConfig, manifest: &CorpusManifest, out_dir: &Path) -> Result<(PathBuf, Vec<EpochMetrics>)> {
    cfg.validate()?;
    let cc = &manifest.header.config;
    let mut model = GanModel::new(cc.width, cc.height, cc.classes.clone(), cfg.latent, cfg.seed, manifest.header.config_hash)?;
    let data = CorpusData::load(manifest, Split::Train)?;

    std::fs::create_dir_all(out_dir).map_err(|e| VqosError::io(out_dir.display().to_string(), e))?;
    let ckpt_path = out_dir.join("gan.ckpt");
    model.save(&ckpt_path)?;

    let csv_path = out_dir.join("metrics_gan.csv");
    let file = std::fs::File::create(&csv_path).map_err(|e| VqosError::io(csv_path.display().to_string(), e))?;
    let mut csv = std::io::BufWriter::new(file);
    write_line(&mut csv, &csv_path, GAN_METRICS_HEADER)?;

    let mut opt_g = AdamState::new(cfg.lr_g);
    let mut opt_d = AdamState::new(cfg.lr_d);
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let epoch_seed = derive_seed(cfg.seed, epoch as u64, 0, 3);
        let mut acc = StepMetrics {
            disc_loss: 0.0,
            gen_loss: 0.0,
            gen_adv: 0.0,
            gen_rec: 0.0,
            gen_cls: 0.0,
            n: 0,
            rate_correct: 0,
            loss_correct: 0,
            joint_correct: 0,
            psnr_sum: 0.0,
        };
        let mut n_batches = 0usize;
        for (batch_id, b) in data.batches(cfg.batch, epoch_seed).iter().enumerate() {
            let m = if cfg.augment {
                let mut arng = crate::seed::rng_for(epoch_seed, 0x617567, batch_id as u64, 0);
                let (rs, os) = shift_batch(&b.recv, &b.org, cc.emulator.block, &mut arng);
                let rr: Vec<&Frame> = rs.iter().collect();
                let or: Vec<&Frame> = os.iter().collect();
                train_step(&mut model, &mut opt_g, &mut opt_d, &rr, &or, &b.states, cfg, epoch, batch_id)?
            } else {
                train_step(&mut model, &mut opt_g, &mut opt_d, &b.recv, &b.org, &b.states, cfg, epoch, batch_id)?
            };
            acc.disc_loss += m.disc_loss;
            acc.gen_loss += m.gen_loss;
            acc.gen_adv += m.gen_adv;
            acc.gen_rec += m.gen_rec;
            acc.gen_cls += m.gen_cls;
            acc.n += m.n;
            acc.rate_correct += m.rate_correct;
            acc.loss_correct += m.loss_correct;
            acc.joint_correct += m.joint_correct;
            acc.psnr_sum += m.psnr_sum;
            n_batches += 1;
        }
        let nb = n_batches.max(1) as f64;
        let ns = acc.n.max(1) as f64;
        let em = EpochMetrics {
            epoch,
            disc_loss: acc.disc_loss / nb,
            gen_loss: acc.gen_loss / nb,
            gen_adv: acc.gen_adv / nb,
            gen_rec: acc.gen_rec / nb,
            gen_cls: acc.gen_cls / nb,
            rate_acc: acc.rate_correct as f64 / ns,
            loss_acc: acc.loss_correct as f64 / ns,
            joint_acc: acc.joint_correct as f64 / ns,
            recon_psnr: acc.psnr_sum / ns,
        };
        write_line(&mut csv, &csv_path, &em.csv_row())?;
        history.push(em);
        if epoch % cfg.checkpoint_interval == 0 && epoch != cfg.epochs {
            model.save(&out_dir.join(format!("gan_e{epoch:03}.ckpt")))?;
        }
    }
    model.save(&ckpt_path)?;
    Ok((ckpt_path, history))
}

/// Classification output for one frame.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Prediction {
    pub state: NetworkState,
    pub rate_probs: Vec<f64>,
    pub loss_probs: Vec<f64>,
    /// Discriminator's real-vs-generated score; absent for the baseline.
    pub validity: Option<f64>,
}

/// Run the discriminator heads on a received frame (no original needed).
pub fn predict(model: &GanModel, frame: &Frame) -> Result<Prediction> {
    let x = frames_tensor(&[frame])?;
    let mut g = Graph::new();
    let xv = g.leaf(&x);
    let (out, _) = model.disc.forward(&mut g, xv, true)?;
    let rate_sm = g.softmax(out.rate_logits)?;
    let loss_sm = g.softmax(out.loss_logits)?;
    let rate_probs = g.data(rate_sm).to_vec();
    let loss_probs = g.data(loss_sm).to_vec();
    let state = model.classes.state_of(argmax(&rate_probs), argmax(&loss_probs));
    Ok(Prediction { state, rate_probs, loss_probs, validity: Some(g.data(out.validity)[0]) })
}

/// Reconstruct a received frame. With no labels given, runs the two-stage
/// flow: predict the network state first, then condition the generator on it.
pub fn reconstruct(model: &GanModel, frame: &Frame, labels: Option<NetworkState>) -> Result<(Frame, NetworkState)> {
    let state = match labels {
        Some(st) => {
            model.classes.indices(&st)?; // reject labels outside the configured classes
            st
        }
        None => predict(model, frame)?.state,
    };
    let x = conditioned_input(&[frame], &[state], &model.classes)?;
    let mut g = Graph::new();
    let xv = g.leaf(&x);
    let (out, _) = model.gen.forward(&mut g, xv, true)?;
    let recon = Frame::new(frame.width, frame.height, 1, g.data(out).to_vec())?;
    Ok((recon, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_for;
    use rand::Rng;

    fn noise_frame(seed: u64) -> Frame {
        let mut rng = rng_for(seed, 8, 8, 8);
        Frame::new(64, 64, 1, (0..64 * 64).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap()
    }

    fn tiny_model(seed: u64) -> GanModel {
        GanModel::new(64, 64, ClassSets::default(), 32, seed, 0).unwrap()
    }

    fn batch() -> (Vec<Frame>, Vec<Frame>, Vec<NetworkState>) {
        let org: Vec<Frame> = (0..4).map(|i| noise_frame(100 + i)).collect();
        let recv: Vec<Frame> = (0..4).map(|i| noise_frame(200 + i)).collect();
        let classes = ClassSets::default();
        let states: Vec<NetworkState> = (0..4).map(|i| classes.state_of(i % 2, i % 3)).collect();
        (recv, org, states)
    }

    #[test]
    fn step_is_deterministic_and_loss_decomposes() {
        let (recv, org, states) = batch();
        let rrefs: Vec<&Frame> = recv.iter().collect();
        let orefs: Vec<&Frame> = org.iter().collect();
        let cfg = TrainConfig { latent: 32, ..TrainConfig::default() };
        let run = || {
            let mut model = tiny_model(5);
            let mut og = AdamState::new(cfg.lr_g);
            let mut od = AdamState::new(cfg.lr_d);
            train_step(&mut model, &mut og, &mut od, &rrefs, &orefs, &states, &cfg, 1, 0).unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a, b, "same seed must give bit-identical step metrics");
        let combined = cfg.lambda_adv * a.gen_adv + cfg.lambda_rec * a.gen_rec + cfg.lambda_cls * a.gen_cls;
        assert!((a.gen_loss - combined).abs() < 1e-9, "loss decomposition broke: {} vs {combined}", a.gen_loss);
        assert!(a.disc_loss.is_finite() && a.gen_loss.is_finite());
    }

    #[test]
    fn degenerate_weights_reduce_to_plain_autoencoder_loss() {
        let (recv, org, states) = batch();
        let rrefs: Vec<&Frame> = recv.iter().collect();
        let orefs: Vec<&Frame> = org.iter().collect();
        let cfg = TrainConfig { lambda_adv: 0.0, lambda_cls: 0.0, latent: 32, ..TrainConfig::default() };
        let mut model = tiny_model(6);
        let mut og = AdamState::new(cfg.lr_g);
        let mut od = AdamState::new(cfg.lr_d);
        let m = train_step(&mut model, &mut og, &mut od, &rrefs, &orefs, &states, &cfg, 1, 0).unwrap();
        assert!((m.gen_loss - m.gen_rec).abs() < 1e-12, "gen loss {} vs pure L1 {}", m.gen_loss, m.gen_rec);
    }

    #[test]
    fn gen_loss_gradient_matches_finite_differences() {
        let (recv, org, states) = batch();
        let rrefs: Vec<&Frame> = recv.iter().collect();
        let orefs: Vec<&Frame> = org.iter().collect();
        let classes = ClassSets::default();
        let cfg = TrainConfig { latent: 32, ..TrainConfig::default() };
        let mut model = tiny_model(7);
        let x_cond = conditioned_input(&rrefs, &states, &classes).unwrap();
        let x_org = frames_tensor(&orefs).unwrap();
        let (rate_t, loss_t) = label_indices(&states, &classes).unwrap();

        let loss_of = |model: &GanModel| -> f64 {
            let mut g = Graph::new();
            let parts = gen_loss_graph(&mut g, model, &x_cond, &x_org, &rate_t, &loss_t, &cfg, true).unwrap();
            g.scalar_value(parts.total)
        };

        // analytic gradients
        let mut g = Graph::new();
        let parts = gen_loss_graph(&mut g, &model, &x_cond, &x_org, &rate_t, &loss_t, &cfg, false).unwrap();
        g.backward(parts.total).unwrap();
        for t in model.gen.params_mut() {
            t.zero_grad();
        }
        parts.bound.write_back(&g, model.gen.params_mut());
        let grads: Vec<Vec<f64>> = model.gen.params().iter().map(|(_, t)| t.grad_ref().to_vec()).collect();

        // probe 10 sampled parameter tensors across layers. Within each
        // tensor, check the max-|grad| entry: the loss has ReLU/L1 kinks, so
        // near-zero-gradient coordinates drown in O(h) kink noise no matter
        // the step. A step ladder rides out probe-specific kinks (the error
        // collapses to ~1e-12 once no kink sits inside [x-h, x+h]).
        // Probe weight tensors only: nudging a bias shifts every downstream
        // ReLU pre-activation by the same amount, so kink crossings scale
        // with h and the FD error floor sits above the target no matter the
        // step. Bias gradients are covered by the layer-level FD tests.
        // Within each sampled tensor, check the max-|grad| entry, riding a
        // step ladder past probe-specific kinks.
        let mut rng = rng_for(99, 0, 0, 0);
        let weight_idx: Vec<usize> = (0..model.gen.params().len())
            .filter(|&i| model.gen.params()[i].1.shape.len() > 1)
            .collect();
        for probe in 0..10 {
            let pi = weight_idx[rng.gen_range(0..weight_idx.len())];
            let ei = grads[pi]
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .map(|(i, _)| i)
                .unwrap();
            let an = grads[pi][ei];
            let orig = model.gen.params()[pi].1.data[ei];
            let best = [1e-4, 3e-5, 1e-5]
                .iter()
                .map(|&h| {
                    model.gen.params_mut()[pi].data[ei] = orig + h;
                    let up = loss_of(&model);
                    model.gen.params_mut()[pi].data[ei] = orig - h;
                    let down = loss_of(&model);
                    let fd = (up - down) / (2.0 * h);
                    ((fd - an) / an.abs().max(fd.abs()).max(1e-6)).abs()
                })
                .fold(f64::INFINITY, f64::min);
            model.gen.params_mut()[pi].data[ei] = orig;
            assert!(best < 1e-4, "probe {probe}: param {pi}[{ei}] analytic {an}, best fd rel err {best}");
        }
    }

    #[test]
    fn checkpoint_round_trips_to_identical_forward() {
        let dir = tempfile::tempdir().unwrap();
        let model = tiny_model(8);
        let path = dir.path().join("m.ckpt");
        model.save(&path).unwrap();
        let loaded = GanModel::load(&path).unwrap();
        let loaded2 = GanModel::load(&path).unwrap();
        let f = noise_frame(42);
        let p1 = predict(&loaded, &f).unwrap();
        let p2 = predict(&loaded2, &f).unwrap();
        assert_eq!(p1, p2);
        let (r1, _) = reconstruct(&loaded, &f, Some(NetworkState::new(1200, 0.10))).unwrap();
        let (r2, _) = reconstruct(&loaded2, &f, Some(NetworkState::new(1200, 0.10))).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn reconstruct_rejects_unknown_labels() {
        let model = tiny_model(9);
        let f = noise_frame(1);
        assert!(reconstruct(&model, &f, Some(NetworkState::new(999, 0.05))).is_err());
        // two-stage flow picks a configured state
        let (_, st) = reconstruct(&model, &f, None).unwrap();
        assert!(model.classes.indices(&st).is_ok());
    }

    #[test]
    fn overfits_single_sample_as_autoencoder() {
        // capacity sanity: with adversarial and classification terms off,
        // 200 steps on one frame should drive L1 near zero
        let f = noise_frame(77);
        let smooth: Vec<f64> = f
            .pixels
            .iter()
            .enumerate()
            .map(|(i, _)| 0.3 + 0.4 * ((i % 64) as f64 / 64.0))
            .collect();
        let target = Frame::new(64, 64, 1, smooth).unwrap();
        let cfg = TrainConfig {
            lambda_adv: 0.0,
            lambda_cls: 0.0,
            lr_g: 5e-3,
            latent: 32,
            ..TrainConfig::default()
        };
        let mut model = tiny_model(10);
        let mut og = AdamState::new(cfg.lr_g);
        let mut od = AdamState::new(cfg.lr_d);
        let states = vec![NetworkState::new(1600, 0.05)];
        let mut last = f64::INFINITY;
        for step in 0..200 {
            let m = train_step(&mut model, &mut og, &mut od, &[&target], &[&target], &states, &cfg, 1, step).unwrap();
            last = m.gen_rec;
        }
        assert!(last < 0.02, "L1 after 200 steps: {last}");
    }

    #[test]
    fn epoch_zero_trains_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let corpus_cfg = crate::corpus::CorpusConfig { frames: 6, width: 32, height: 32, ..Default::default() };
        let corpus_dir = dir.path().join("corpus");
        let manifest = crate::corpus::build_corpus(&corpus_cfg, &corpus_dir).unwrap();
        let cfg = TrainConfig { epochs: 0, latent: 32, ..TrainConfig::default() };
        let out = dir.path().join("run");
        let (ckpt, history) = train_gan(&cfg, &manifest, &out).unwrap();
        assert!(history.is_empty());
        assert!(ckpt.is_file());
        let csv = std::fs::read_to_string(out.join("metrics_gan.csv")).unwrap();
        assert_eq!(csv.trim(), GAN_METRICS_HEADER);
        GanModel::load(&ckpt).unwrap();
    }


}
