//! Network architectures: conditional generator, three-headed
//! discriminator, and the paired-input baseline CNN.
//!
//! All convolutions are 4x4 stride-2 pad-1 (exact 2x down/up-sampling), with
//! one 3x3 stride-1 layer at the bottom of the discriminator trunk. Frames
//! must be multiples of 8 so three stride-2 stages land on integer sizes.

use crate::corpus::Frame;
use crate::emulator::{ClassSets, NetworkState};
use crate::error::{Result, VqosError};
use crate::seed::rng_for;
use crate::tensor::{he_uniform, xavier_uniform, zeros_param, Graph, Tensor, Var};

pub const GEN_CH: [usize; 3] = [8, 16, 32];
pub const DISC_CH: [usize; 4] = [8, 16, 32, 32];
pub const LEAK: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelShape {
    pub width: usize,
    pub height: usize,
    pub n_rate: usize,
    pub n_loss: usize,
    pub latent: usize,
}

impl ModelShape {
    pub fn new(width: usize, height: usize, classes: &ClassSets, latent: usize) -> Result<Self> {
        if width % 8 != 0 || height % 8 != 0 || width < 8 || height < 8 {
            return Err(VqosError::shape(format!(
                "frame size {width}x{height} must be a positive multiple of 8"
            )));
        }
        if latent == 0 {
            return Err(VqosError::InvalidArgument("latent dim must be positive".into()));
        }
        Ok(ModelShape { width, height, n_rate: classes.rates.len(), n_loss: classes.losses.len(), latent })
    }

    /// Generator input channels: frame + one-hot label planes.
    pub fn gen_in_ch(&self) -> usize {
        1 + self.n_rate + self.n_loss
    }

    /// Spatial size after the three stride-2 stages.
    pub fn bottleneck(&self) -> (usize, usize) {
        (self.height / 8, self.width / 8)
    }

    pub fn bottleneck_feats(&self) -> usize {
        let (h, w) = self.bottleneck();
        GEN_CH[2] * h * w
    }
}

#[derive(Debug, Clone)]
pub struct ConvLayer {
    pub w: Tensor,
    pub b: Tensor,
    pub stride: usize,
    pub pad: usize,
}

#[derive(Debug, Clone)]
pub struct DenseLayer {
    pub w: Tensor,
    pub b: Tensor,
}

fn conv_init(out_ch: usize, in_ch: usize, k: usize, stride: usize, pad: usize, seed: u64, idx: u64) -> ConvLayer {
    let fan_in = in_ch * k * k;
    let mut rng = rng_for(seed, 0x636f_6e76, idx, 0);
    ConvLayer {
        w: he_uniform(vec![out_ch, in_ch, k, k], fan_in, &mut rng),
        b: zeros_param(vec![out_ch]),
        stride,
        pad,
    }
}

/// Transpose-conv weight is [C_in, C_out, k, k]; fan-in is the transpose's
/// own input side.
fn convt_init(in_ch: usize, out_ch: usize, k: usize, stride: usize, pad: usize, seed: u64, idx: u64) -> ConvLayer {
    let fan_in = in_ch * k * k;
    let mut rng = rng_for(seed, 0x6374_7270, idx, 0);
    ConvLayer {
        w: he_uniform(vec![in_ch, out_ch, k, k], fan_in, &mut rng),
        b: zeros_param(vec![out_ch]),
        stride,
        pad,
    }
}

fn dense_init(out_f: usize, in_f: usize, seed: u64, idx: u64) -> DenseLayer {
    let mut rng = rng_for(seed, 0x6465_6e73, idx, 0);
    DenseLayer { w: xavier_uniform(vec![out_f, in_f], in_f, out_f, &mut rng), b: zeros_param(vec![out_f]) }
}

/// Graph handles for one model's parameters, in canonical order.
pub struct Bound {
    pub vars: Vec<Var>,
    frozen: bool,
}

impl Bound {
    fn bind(g: &mut Graph, params: Vec<&Tensor>, frozen: bool) -> Self {
        let vars = params
            .into_iter()
            .map(|t| {
                if frozen {
                    g.constant(t.shape.clone(), t.data.clone()).expect("param shape is consistent")
                } else {
                    g.leaf(t)
                }
            })
            .collect();
        Bound { vars, frozen }
    }

    /// Accumulate graph gradients into the model's parameter tensors.
    /// `params_mut` must be the same canonical order used at bind time.
    pub fn write_back(&self, g: &Graph, params: Vec<&mut Tensor>) {
        assert!(!self.frozen, "frozen parameters have no gradients");
        for (var, t) in self.vars.iter().zip(params) {
            g.write_back_grad(*var, t);
        }
    }
}

/// Encoder (3 strided convs) -> latent -> decoder (3 transpose convs),
/// conditioned by one-hot label planes concatenated to the input.
#[derive(Debug, Clone)]
pub struct Generator {
    pub shape: ModelShape,
    pub enc: [ConvLayer; 3],
    pub to_latent: DenseLayer,
    pub from_latent: DenseLayer,
    pub dec: [ConvLayer; 3],
}

impl Generator {
    pub fn new(shape: ModelShape, seed: u64) -> Self {
        let cin = shape.gen_in_ch();
        let feats = shape.bottleneck_feats();
        Generator {
            shape,
            enc: [
                conv_init(GEN_CH[0], cin, 4, 2, 1, seed, 0),
                conv_init(GEN_CH[1], GEN_CH[0], 4, 2, 1, seed, 1),
                conv_init(GEN_CH[2], GEN_CH[1], 4, 2, 1, seed, 2),
            ],
            to_latent: dense_init(shape.latent, feats, seed, 0),
            from_latent: dense_init(feats, shape.latent, seed, 1),
            dec: [
                convt_init(GEN_CH[2], GEN_CH[1], 4, 2, 1, seed, 0),
                convt_init(GEN_CH[1], GEN_CH[0], 4, 2, 1, seed, 1),
                convt_init(GEN_CH[0], 1, 4, 2, 1, seed, 2),
            ],
        }
    }

    pub fn params(&self) -> Vec<(String, &Tensor)> {
        let mut out = Vec::new();
        for (i, l) in self.enc.iter().enumerate() {
            out.push((format!("gen.enc{i}.w"), &l.w));
            out.push((format!("gen.enc{i}.b"), &l.b));
        }
        out.push(("gen.to_latent.w".into(), &self.to_latent.w));
        out.push(("gen.to_latent.b".into(), &self.to_latent.b));
        out.push(("gen.from_latent.w".into(), &self.from_latent.w));
        out.push(("gen.from_latent.b".into(), &self.from_latent.b));
        for (i, l) in self.dec.iter().enumerate() {
            out.push((format!("gen.dec{i}.w"), &l.w));
            out.push((format!("gen.dec{i}.b"), &l.b));
        }
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out: Vec<&mut Tensor> = Vec::new();
        for l in self.enc.iter_mut() {
            out.push(&mut l.w);
            out.push(&mut l.b);
        }
        out.push(&mut self.to_latent.w);
        out.push(&mut self.to_latent.b);
        out.push(&mut self.from_latent.w);
        out.push(&mut self.from_latent.b);
        for l in self.dec.iter_mut() {
            out.push(&mut l.w);
            out.push(&mut l.b);
        }
        out
    }

    fn param_refs(&self) -> Vec<&Tensor> {
        self.params().into_iter().map(|(_, t)| t).collect()
    }

    /// Forward a conditioned batch `[N, 1+n_rate+n_loss, H, W]` to
    /// reconstructed frames `[N, 1, H, W]` in (0,1).
    pub fn forward(&self, g: &mut Graph, x: Var, frozen: bool) -> Result<(Var, Bound)> {
        let s = g.shape(x).to_vec();
        let want = [self.shape.gen_in_ch(), self.shape.height, self.shape.width];
        if s.len() != 4 || s[1..] != want {
            return Err(VqosError::shape(format!(
                "generator input {s:?}, want [N, {}, {}, {}]",
                want[0], want[1], want[2]
            )));
        }
        let n = s[0];
        let bound = Bound::bind(g, self.param_refs(), frozen);
        let v = &bound.vars;
        let mut h = x;
        for (i, l) in self.enc.iter().enumerate() {
            h = g.conv2d(h, v[2 * i], v[2 * i + 1], l.stride, l.pad)?;
            h = g.relu(h)?;
        }
        let feats = self.shape.bottleneck_feats();
        h = g.reshape(h, vec![n, feats])?;
        h = g.dense(h, v[6], v[7])?;
        h = g.relu(h)?;
        h = g.dense(h, v[8], v[9])?;
        h = g.relu(h)?;
        let (bh, bw) = self.shape.bottleneck();
        h = g.reshape(h, vec![n, GEN_CH[2], bh, bw])?;
        for (i, l) in self.dec.iter().enumerate() {
            h = g.conv_transpose2d(h, v[10 + 2 * i], v[11 + 2 * i], l.stride, l.pad)?;
            h = if i + 1 < self.dec.len() { g.relu(h)? } else { g.sigmoid(h)? };
        }
        Ok((h, bound))
    }
}

/// Shared 4-conv trunk used by the discriminator and the baseline.
#[derive(Debug, Clone)]
pub struct ConvTrunk {
    pub layers: [ConvLayer; 4],
}

impl ConvTrunk {
    fn new(in_ch: usize, seed: u64) -> Self {
        ConvTrunk {
            layers: [
                conv_init(DISC_CH[0], in_ch, 4, 2, 1, seed, 10),
                conv_init(DISC_CH[1], DISC_CH[0], 4, 2, 1, seed, 11),
                conv_init(DISC_CH[2], DISC_CH[1], 4, 2, 1, seed, 12),
                conv_init(DISC_CH[3], DISC_CH[2], 3, 1, 1, seed, 13),
            ],
        }
    }

    fn forward(&self, g: &mut Graph, x: Var, vars: &[Var], n: usize, feats: usize) -> Result<Var> {
        let mut h = x;
        for (i, l) in self.layers.iter().enumerate() {
            h = g.conv2d(h, vars[2 * i], vars[2 * i + 1], l.stride, l.pad)?;
            h = g.leaky_relu(h, LEAK)?;
        }
        g.reshape(h, vec![n, feats])
    }
}

/// Discriminator outputs on a batch.
pub struct DiscOut {
    pub rate_logits: Var,
    pub loss_logits: Var,
    pub validity: Var,
}

/// 4-conv trunk with rate, loss, and validity heads.
#[derive(Debug, Clone)]
pub struct Discriminator {
    pub shape: ModelShape,
    pub trunk: ConvTrunk,
    pub rate_head: DenseLayer,
    pub loss_head: DenseLayer,
    pub val_head: DenseLayer,
}

impl Discriminator {
    pub fn new(shape: ModelShape, seed: u64) -> Self {
        let feats = Self::feats(&shape);
        Discriminator {
            shape,
            trunk: ConvTrunk::new(1, seed),
            rate_head: dense_init(shape.n_rate, feats, seed, 10),
            loss_head: dense_init(shape.n_loss, feats, seed, 11),
            val_head: dense_init(1, feats, seed, 12),
        }
    }

    fn feats(shape: &ModelShape) -> usize {
        DISC_CH[3] * (shape.height / 8) * (shape.width / 8)
    }

    pub fn params(&self) -> Vec<(String, &Tensor)> {
        let mut out = Vec::new();
        for (i, l) in self.trunk.layers.iter().enumerate() {
            out.push((format!("disc.conv{i}.w"), &l.w));
            out.push((format!("disc.conv{i}.b"), &l.b));
        }
        for (name, l) in [
            ("disc.rate_head", &self.rate_head),
            ("disc.loss_head", &self.loss_head),
            ("disc.val_head", &self.val_head),
        ] {
            out.push((format!("{name}.w"), &l.w));
            out.push((format!("{name}.b"), &l.b));
        }
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out: Vec<&mut Tensor> = Vec::new();
        for l in self.trunk.layers.iter_mut() {
            out.push(&mut l.w);
            out.push(&mut l.b);
        }
        for l in [&mut self.rate_head, &mut self.loss_head, &mut self.val_head] {
            out.push(&mut l.w);
            out.push(&mut l.b);
        }
        out
    }

    fn param_refs(&self) -> Vec<&Tensor> {
        self.params().into_iter().map(|(_, t)| t).collect()
    }

    /// Forward `[N, 1, H, W]` frames. Bind once per graph and reuse the
    /// returned `Bound` for further batches in the same graph.
    pub fn bind(&self, g: &mut Graph, frozen: bool) -> Bound {
        Bound::bind(g, self.param_refs(), frozen)
    }

    pub fn forward_bound(&self, g: &mut Graph, x: Var, bound: &Bound) -> Result<DiscOut> {
        let s = g.shape(x).to_vec();
        if s.len() != 4 || s[1..] != [1, self.shape.height, self.shape.width] {
            return Err(VqosError::shape(format!(
                "discriminator input {s:?}, want [N, 1, {}, {}]",
                self.shape.height, self.shape.width
            )));
        }
        let n = s[0];
        let v = &bound.vars;
        let flat = self.trunk.forward(g, x, &v[..8], n, Self::feats(&self.shape))?;
        let rate_logits = g.dense(flat, v[8], v[9])?;
        let loss_logits = g.dense(flat, v[10], v[11])?;
        let val_raw = g.dense(flat, v[12], v[13])?;
        let validity = g.sigmoid(val_raw)?;
        Ok(DiscOut { rate_logits, loss_logits, validity })
    }

    pub fn forward(&self, g: &mut Graph, x: Var, frozen: bool) -> Result<(DiscOut, Bound)> {
        let bound = self.bind(g, frozen);
        let out = self.forward_bound(g, x, &bound)?;
        Ok((out, bound))
    }
}

/// Baseline that sees the (original, received) pair as two input channels.
/// Same trunk depth as the discriminator so the comparison isolates the
/// input regime, not capacity.
#[derive(Debug, Clone)]
pub struct PairedCnn {
    pub shape: ModelShape,
    pub trunk: ConvTrunk,
    pub rate_head: DenseLayer,
    pub loss_head: DenseLayer,
}

impl PairedCnn {
    pub fn new(shape: ModelShape, seed: u64) -> Self {
        let feats = Discriminator::feats(&shape);
        PairedCnn {
            shape,
            trunk: ConvTrunk::new(2, seed),
            rate_head: dense_init(shape.n_rate, feats, seed, 20),
            loss_head: dense_init(shape.n_loss, feats, seed, 21),
        }
    }

    pub fn params(&self) -> Vec<(String, &Tensor)> {
        let mut out = Vec::new();
        for (i, l) in self.trunk.layers.iter().enumerate() {
            out.push((format!("cnn.conv{i}.w"), &l.w));
            out.push((format!("cnn.conv{i}.b"), &l.b));
        }
        for (name, l) in [("cnn.rate_head", &self.rate_head), ("cnn.loss_head", &self.loss_head)] {
            out.push((format!("{name}.w"), &l.w));
            out.push((format!("{name}.b"), &l.b));
        }
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out: Vec<&mut Tensor> = Vec::new();
        for l in self.trunk.layers.iter_mut() {
            out.push(&mut l.w);
            out.push(&mut l.b);
        }
        for l in [&mut self.rate_head, &mut self.loss_head] {
            out.push(&mut l.w);
            out.push(&mut l.b);
        }
        out
    }

    /// Forward `[N, 2, H, W]` (original, received) pairs.
    pub fn forward(&self, g: &mut Graph, x: Var, frozen: bool) -> Result<((Var, Var), Bound)> {
        let s = g.shape(x).to_vec();
        if s.len() != 4 || s[1..] != [2, self.shape.height, self.shape.width] {
            return Err(VqosError::shape(format!(
                "baseline input {s:?}, want [N, 2, {}, {}]",
                self.shape.height, self.shape.width
            )));
        }
        let n = s[0];
        let refs: Vec<&Tensor> = self.params().into_iter().map(|(_, t)| t).collect();
        let bound = Bound::bind(g, refs, frozen);
        let v = &bound.vars;
        let flat = self.trunk.forward(g, x, &v[..8], n, Discriminator::feats(&self.shape))?;
        let rate_logits = g.dense(flat, v[8], v[9])?;
        let loss_logits = g.dense(flat, v[10], v[11])?;
        Ok(((rate_logits, loss_logits), bound))
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|(_, t)| t.numel()).sum()
    }
}

// ---- batch assembly ----

fn check_frames(frames: &[&Frame], height: usize, width: usize) -> Result<()> {
    if frames.is_empty() {
        return Err(VqosError::InvalidArgument("empty batch".into()));
    }
    for f in frames {
        if f.width != width || f.height != height || f.channels != 1 {
            return Err(VqosError::shape(format!(
                "frame {}x{}x{} does not match model {width}x{height}x1",
                f.width, f.height, f.channels
            )));
        }
    }
    Ok(())
}

/// Stack frames into `[N, 1, H, W]`.
pub fn frames_tensor(frames: &[&Frame]) -> Result<Tensor> {
    let (h, w) = (frames.first().map(|f| f.height).unwrap_or(0), frames.first().map(|f| f.width).unwrap_or(0));
    check_frames(frames, h, w)?;
    let mut data = Vec::with_capacity(frames.len() * h * w);
    for f in frames {
        data.extend_from_slice(&f.pixels);
    }
    Tensor::new(vec![frames.len(), 1, h, w], data)
}

/// Stack (original, received) pairs into `[N, 2, H, W]`.
pub fn paired_tensor(org: &[&Frame], recv: &[&Frame]) -> Result<Tensor> {
    if org.len() != recv.len() {
        return Err(VqosError::shape("paired batch length mismatch".to_string()));
    }
    let (h, w) = (org.first().map(|f| f.height).unwrap_or(0), org.first().map(|f| f.width).unwrap_or(0));
    check_frames(org, h, w)?;
    check_frames(recv, h, w)?;
    let mut data = Vec::with_capacity(org.len() * 2 * h * w);
    for (o, r) in org.iter().zip(recv) {
        data.extend_from_slice(&o.pixels);
        data.extend_from_slice(&r.pixels);
    }
    Tensor::new(vec![org.len(), 2, h, w], data)
}

/// Stack received frames plus broadcast one-hot label planes into
/// `[N, 1 + n_rate + n_loss, H, W]` — the generator's conditioned input.
pub fn conditioned_input(recv: &[&Frame], states: &[NetworkState], classes: &ClassSets) -> Result<Tensor> {
    if recv.len() != states.len() {
        return Err(VqosError::shape("batch frames/labels length mismatch".to_string()));
    }
    let (h, w) = (recv.first().map(|f| f.height).unwrap_or(0), recv.first().map(|f| f.width).unwrap_or(0));
    check_frames(recv, h, w)?;
    let planes = 1 + classes.rates.len() + classes.losses.len();
    let spatial = h * w;
    let mut data = vec![0.0; recv.len() * planes * spatial];
    for (i, (f, st)) in recv.iter().zip(states).enumerate() {
        let (ri, li) = classes.indices(st)?;
        let base = i * planes * spatial;
        data[base..base + spatial].copy_from_slice(&f.pixels);
        let rate_plane = base + (1 + ri) * spatial;
        data[rate_plane..rate_plane + spatial].fill(1.0);
        let loss_plane = base + (1 + classes.rates.len() + li) * spatial;
        data[loss_plane..loss_plane + spatial].fill(1.0);
    }
    Tensor::new(vec![recv.len(), planes, h, w], data)
}

/// Class indices for a batch of states, for the cross-entropy heads.
pub fn label_indices(states: &[NetworkState], classes: &ClassSets) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut rates = Vec::with_capacity(states.len());
    let mut losses = Vec::with_capacity(states.len());
    for st in states {
        let (ri, li) = classes.indices(st)?;
        rates.push(ri);
        losses.push(li);
    }
    Ok((rates, losses))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape64() -> ModelShape {
        ModelShape::new(64, 64, &ClassSets::default(), 64).unwrap()
    }

    fn noise_frame(seed: u64, w: usize, h: usize) -> Frame {
        use rand::Rng;
        let mut rng = rng_for(seed, 1, 2, 3);
        Frame::new(w, h, 1, (0..w * h).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn generator_output_shape_and_range() {
        let shape = shape64();
        let gen = Generator::new(shape, 3);
        let frames = [noise_frame(0, 64, 64), noise_frame(1, 64, 64)];
        let refs: Vec<&Frame> = frames.iter().collect();
        let states = vec![NetworkState::new(1200, 0.05), NetworkState::new(1600, 0.25)];
        let x = conditioned_input(&refs, &states, &ClassSets::default()).unwrap();
        let mut g = Graph::new();
        let xv = g.leaf(&x);
        let (out, _) = gen.forward(&mut g, xv, true).unwrap();
        assert_eq!(g.shape(out), [2, 1, 64, 64]);
        assert!(g.data(out).iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn generator_rejects_wrong_input_shape() {
        let gen = Generator::new(shape64(), 3);
        let mut g = Graph::new();
        let xv = g.constant(vec![1, 1, 64, 64], vec![0.0; 64 * 64]).unwrap();
        assert!(gen.forward(&mut g, xv, true).is_err());
    }

    #[test]
    fn discriminator_heads_have_consistent_shapes() {
        let disc = Discriminator::new(shape64(), 4);
        let f = noise_frame(2, 64, 64);
        let x = frames_tensor(&[&f]).unwrap();
        let mut g = Graph::new();
        let xv = g.leaf(&x);
        let (out, _) = disc.forward(&mut g, xv, true).unwrap();
        assert_eq!(g.shape(out.rate_logits), [1, 2]);
        assert_eq!(g.shape(out.loss_logits), [1, 3]);
        assert_eq!(g.shape(out.validity), [1, 1]);
        let v = g.data(out.validity)[0];
        assert!(v > 0.0 && v < 1.0, "validity {v} must be strictly inside (0,1)");
        let sm = g.softmax(out.rate_logits).unwrap();
        let sum: f64 = g.data(sm).iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn label_planes_receive_gradient() {
        // conditioning must actually flow into the loss
        let shape = shape64();
        let gen = Generator::new(shape, 5);
        let f = noise_frame(3, 64, 64);
        let x = conditioned_input(&[&f], &[NetworkState::new(1600, 0.10)], &ClassSets::default())
            .unwrap()
            .with_grad();
        let mut g = Graph::new();
        let xv = g.leaf(&x);
        let (out, _) = gen.forward(&mut g, xv, false).unwrap();
        let target = g.constant(vec![1, 1, 64, 64], f.pixels.clone()).unwrap();
        let loss = gen_l1(&mut g, out, target);
        g.backward(loss).unwrap();
        let grad = g.grad(xv);
        let spatial = 64 * 64;
        let label_grad_norm: f64 = grad[spatial..].iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(label_grad_norm > 0.0, "label planes got zero gradient");
    }

    fn gen_l1(g: &mut Graph, a: Var, b: Var) -> Var {
        g.l1(a, b).unwrap()
    }

    #[test]
    fn conditioning_changes_output() {
        let shape = shape64();
        let gen = Generator::new(shape, 6);
        let f = noise_frame(4, 64, 64);
        let classes = ClassSets::default();
        let run = |st: NetworkState| {
            let x = conditioned_input(&[&f], &[st], &classes).unwrap();
            let mut g = Graph::new();
            let xv = g.leaf(&x);
            let (out, _) = gen.forward(&mut g, xv, true).unwrap();
            g.data(out).to_vec()
        };
        let a = run(NetworkState::new(1200, 0.05));
        let b = run(NetworkState::new(1600, 0.25));
        let l1: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
        assert!(l1 > 0.0, "label change must perturb the output even untrained");
    }

    #[test]
    fn baseline_uses_paired_input() {
        let shape = shape64();
        let cnn = PairedCnn::new(shape, 7);
        let o = noise_frame(5, 64, 64);
        let r = noise_frame(6, 64, 64);
        let x = paired_tensor(&[&o], &[&r]).unwrap();
        assert_eq!(x.shape, vec![1, 2, 64, 64]);
        let mut g = Graph::new();
        let xv = g.leaf(&x);
        let ((rl, ll), _) = cnn.forward(&mut g, xv, true).unwrap();
        assert_eq!(g.shape(rl), [1, 2]);
        assert_eq!(g.shape(ll), [1, 3]);
        assert!(cnn.param_count() > 0);
    }

    #[test]
    fn deterministic_init_per_seed() {
        let shape = shape64();
        let a = Generator::new(shape, 11);
        let b = Generator::new(shape, 11);
        let c = Generator::new(shape, 12);
        for ((_, ta), (_, tb)) in a.params().iter().zip(b.params()) {
            assert_eq!(ta.data, tb.data);
        }
        assert_ne!(a.params()[0].1.data, c.params()[0].1.data);
    }

    #[test]
    fn odd_frame_sizes_rejected() {
        assert!(ModelShape::new(60, 64, &ClassSets::default(), 64).is_err());
        assert!(ModelShape::new(64, 64, &ClassSets::default(), 0).is_err());
    }
}
