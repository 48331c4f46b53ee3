//! Reverse-mode autodiff over a per-step computation graph.
//!
//! Each training step builds a fresh `Graph`, runs the forward ops, calls
//! `backward` on the scalar loss, and writes gradients back into the
//! persistent parameter `Tensor`s. Backward adds into gradient buffers;
//! zeroing is the caller's job.

use super::convkernel::{self, ConvGeom};
use super::tensor::Tensor;
use crate::error::{Result, VqosError};
use ndarray::ArrayView2;

pub const BCE_EPS: f64 = 1e-7;

/// Handle to a node in a `Graph`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Conv2d { x: Var, w: Var, b: Var, geom: ConvGeom, in_hw: (usize, usize) },
    ConvT2d { x: Var, w: Var, b: Var, geom: ConvGeom },
    Dense { x: Var, w: Var, b: Var },
    Relu { x: Var },
    LeakyRelu { x: Var, alpha: f64 },
    Sigmoid { x: Var },
    Tanh { x: Var },
    Softmax { x: Var, row: usize },
    Add { a: Var, b: Var },
    Scale { x: Var, c: f64 },
    Reshape { x: Var },
    Sum { x: Var },
    Bce { pred: Var, target: Vec<f64> },
    CrossEntropy { logits: Var, targets: Vec<usize> },
    L1 { a: Var, b: Var },
    Mse { a: Var, b: Var },
}

struct Node {
    data: Vec<f64>,
    shape: Vec<usize>,
    grad: Vec<f64>,
    requires_grad: bool,
    op: Op,
}

#[derive(Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

impl Graph {
    pub fn new() -> Self {
        Graph { nodes: Vec::new() }
    }

    fn push(&mut self, data: Vec<f64>, shape: Vec<usize>, requires_grad: bool, op: Op) -> Var {
        let grad = vec![0.0; data.len()];
        self.nodes.push(Node { data, shape, grad, requires_grad, op });
        Var(self.nodes.len() - 1)
    }

    /// Insert a tensor as a graph input. Gradient flows back to it iff
    /// `t.requires_grad`.
    pub fn leaf(&mut self, t: &Tensor) -> Var {
        self.push(t.data.clone(), t.shape.clone(), t.requires_grad, Op::Leaf)
    }

    /// Non-differentiable input.
    pub fn constant(&mut self, shape: Vec<usize>, data: Vec<f64>) -> Result<Var> {
        let numel: usize = shape.iter().product();
        if numel != data.len() {
            return Err(VqosError::shape(format!("constant shape {shape:?} vs {} values", data.len())));
        }
        Ok(self.push(data, shape, false, Op::Leaf))
    }

    pub fn data(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].data
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        &self.nodes[v.0].shape
    }

    pub fn grad(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].grad
    }

    pub fn scalar_value(&self, v: Var) -> f64 {
        self.nodes[v.0].data[0]
    }

    /// Add the node's gradient into the tensor's accumulator.
    pub fn write_back_grad(&self, v: Var, t: &mut Tensor) {
        let g = t.grad.get_or_insert_with(|| vec![0.0; t.data.len()]);
        for (dst, src) in g.iter_mut().zip(self.nodes[v.0].grad.iter()) {
            *dst += *src;
        }
    }

    fn any_grad(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].requires_grad)
    }

    fn dims4(&self, v: Var, what: &str) -> Result<(usize, usize, usize, usize)> {
        let s = self.shape(v);
        if s.len() != 4 {
            return Err(VqosError::shape(format!("{what} must be rank 4, got {s:?}")));
        }
        Ok((s[0], s[1], s[2], s[3]))
    }

    // ---- layers ----

    /// conv2d with weight [K,C,kh,kw] and bias [K]; zero padding.
    pub fn conv2d(&mut self, x: Var, w: Var, b: Var, stride: usize, pad: usize) -> Result<Var> {
        let (n, c, h, wd) = self.dims4(x, "conv2d input")?;
        let (k, wc, kh, kw) = self.dims4(w, "conv2d weight")?;
        if wc != c {
            return Err(VqosError::shape(format!(
                "conv2d: input has {c} channels, weight expects {wc}"
            )));
        }
        if self.shape(b) != [k] {
            return Err(VqosError::shape(format!(
                "conv2d: bias shape {:?}, want [{k}]",
                self.shape(b)
            )));
        }
        if stride < 1 {
            return Err(VqosError::InvalidArgument("conv2d: stride must be >= 1".into()));
        }
        let geom = ConvGeom { channels_in: c, channels_out: k, kh, kw, stride, pad };
        let (ho, wo) = geom.out_hw(h, wd).ok_or_else(|| {
            VqosError::shape(format!(
                "conv2d: kernel {kh}x{kw} does not fit input {h}x{wd} with pad {pad}"
            ))
        })?;
        if ho == 0 || wo == 0 {
            return Err(VqosError::shape("conv2d: zero-sized output".to_string()));
        }
        let y = convkernel::conv_forward(
            self.data(x),
            n,
            h,
            wd,
            &self.nodes[w.0].data,
            Some(&self.nodes[b.0].data),
            &geom,
        );
        let rg = self.any_grad(&[x, w, b]);
        Ok(self.push(y, vec![n, k, ho, wo], rg, Op::Conv2d { x, w, b, geom, in_hw: (h, wd) }))
    }

    /// conv_transpose2d with weight [C_in, C_out, kh, kw] and bias [C_out].
    /// Acts as the adjoint of conv2d with the same kernel.
    pub fn conv_transpose2d(&mut self, x: Var, w: Var, b: Var, stride: usize, pad: usize) -> Result<Var> {
        let (n, c, h, wd) = self.dims4(x, "conv_transpose2d input")?;
        let (wc, k, kh, kw) = self.dims4(w, "conv_transpose2d weight")?;
        if wc != c {
            return Err(VqosError::shape(format!(
                "conv_transpose2d: input has {c} channels, weight expects {wc}"
            )));
        }
        if self.shape(b) != [k] {
            return Err(VqosError::shape(format!(
                "conv_transpose2d: bias shape {:?}, want [{k}]",
                self.shape(b)
            )));
        }
        if stride < 1 {
            return Err(VqosError::InvalidArgument("conv_transpose2d: stride must be >= 1".into()));
        }
        // In the adjoint view this op maps the conv's output side (c) back to
        // its input side (k).
        let geom = ConvGeom { channels_in: k, channels_out: c, kh, kw, stride, pad };
        let (ho, wo) = geom
            .transpose_out_hw(h, wd)
            .filter(|&(a, bb)| a > 0 && bb > 0 && geom.out_hw(a, bb) == Some((h, wd)))
            .ok_or_else(|| {
                VqosError::shape(format!(
                    "conv_transpose2d: invalid geometry for input {h}x{wd}, kernel {kh}x{kw}, stride {stride}, pad {pad}"
                ))
            })?;
        let mut y = convkernel::conv_input_grad(self.data(x), n, ho, wo, &self.nodes[w.0].data, &geom);
        let spatial = ho * wo;
        for ni in 0..n {
            for ki in 0..k {
                let bias = self.nodes[b.0].data[ki];
                let base = (ni * k + ki) * spatial;
                for v in &mut y[base..base + spatial] {
                    *v += bias;
                }
            }
        }
        let rg = self.any_grad(&[x, w, b]);
        Ok(self.push(y, vec![n, k, ho, wo], rg, Op::ConvT2d { x, w, b, geom }))
    }

    /// dense with weight [G,F] and bias [G]: out = x W^T + b.
    pub fn dense(&mut self, x: Var, w: Var, b: Var) -> Result<Var> {
        let xs = self.shape(x).to_vec();
        let ws = self.shape(w).to_vec();
        if xs.len() != 2 || ws.len() != 2 {
            return Err(VqosError::shape(format!("dense: input {xs:?}, weight {ws:?} must be rank 2")));
        }
        let (n, f) = (xs[0], xs[1]);
        let (g, wf) = (ws[0], ws[1]);
        if f != wf {
            return Err(VqosError::shape(format!("dense: input features {f} != weight features {wf}")));
        }
        if self.shape(b) != [g] {
            return Err(VqosError::shape(format!("dense: bias shape {:?}, want [{g}]", self.shape(b))));
        }
        let xm = ArrayView2::from_shape((n, f), self.data(x)).unwrap();
        let wm = ArrayView2::from_shape((g, f), self.data(w)).unwrap();
        let mut out = xm.dot(&wm.t()).into_raw_vec();
        for ni in 0..n {
            for gi in 0..g {
                out[ni * g + gi] += self.nodes[b.0].data[gi];
            }
        }
        let rg = self.any_grad(&[x, w, b]);
        Ok(self.push(out, vec![n, g], rg, Op::Dense { x, w, b }))
    }

    // ---- activations ----

    fn check_finite(&self, x: Var, op: &str) -> Result<()> {
        if let Some(bad) = self.data(x).iter().find(|v| !v.is_finite()) {
            return Err(VqosError::NonFinite(format!("{op}: input contains {bad}")));
        }
        Ok(())
    }

    pub fn relu(&mut self, x: Var) -> Result<Var> {
        self.check_finite(x, "relu")?;
        let data: Vec<f64> = self.data(x).iter().map(|&v| v.max(0.0)).collect();
        let (shape, rg) = (self.shape(x).to_vec(), self.nodes[x.0].requires_grad);
        Ok(self.push(data, shape, rg, Op::Relu { x }))
    }

    pub fn leaky_relu(&mut self, x: Var, alpha: f64) -> Result<Var> {
        self.check_finite(x, "leaky_relu")?;
        let data: Vec<f64> = self.data(x).iter().map(|&v| if v >= 0.0 { v } else { alpha * v }).collect();
        let (shape, rg) = (self.shape(x).to_vec(), self.nodes[x.0].requires_grad);
        Ok(self.push(data, shape, rg, Op::LeakyRelu { x, alpha }))
    }

    pub fn sigmoid(&mut self, x: Var) -> Result<Var> {
        self.check_finite(x, "sigmoid")?;
        let data: Vec<f64> = self.data(x).iter().map(|&v| 1.0 / (1.0 + (-v).exp())).collect();
        let (shape, rg) = (self.shape(x).to_vec(), self.nodes[x.0].requires_grad);
        Ok(self.push(data, shape, rg, Op::Sigmoid { x }))
    }

    pub fn tanh(&mut self, x: Var) -> Result<Var> {
        self.check_finite(x, "tanh")?;
        let data: Vec<f64> = self.data(x).iter().map(|&v| v.tanh()).collect();
        let (shape, rg) = (self.shape(x).to_vec(), self.nodes[x.0].requires_grad);
        Ok(self.push(data, shape, rg, Op::Tanh { x }))
    }

    /// Softmax over the last axis.
    pub fn softmax(&mut self, x: Var) -> Result<Var> {
        self.check_finite(x, "softmax")?;
        let shape = self.shape(x).to_vec();
        let row = *shape.last().ok_or_else(|| VqosError::shape("softmax: rank 0 input".to_string()))?;
        let mut data = self.data(x).to_vec();
        for chunk in data.chunks_mut(row) {
            let m = chunk.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for v in chunk.iter_mut() {
                *v = (*v - m).exp();
                sum += *v;
            }
            for v in chunk.iter_mut() {
                *v /= sum;
            }
        }
        let rg = self.nodes[x.0].requires_grad;
        Ok(self.push(data, shape, rg, Op::Softmax { x, row }))
    }

    // ---- arithmetic ----

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        if self.shape(a) != self.shape(b) {
            return Err(VqosError::shape(format!(
                "add: {:?} vs {:?}",
                self.shape(a),
                self.shape(b)
            )));
        }
        let data: Vec<f64> = self
            .data(a)
            .iter()
            .zip(self.data(b).iter())
            .map(|(x, y)| x + y)
            .collect();
        let (shape, rg) = (self.shape(a).to_vec(), self.any_grad(&[a, b]));
        Ok(self.push(data, shape, rg, Op::Add { a, b }))
    }

    pub fn scale(&mut self, x: Var, c: f64) -> Result<Var> {
        let data: Vec<f64> = self.data(x).iter().map(|&v| c * v).collect();
        let (shape, rg) = (self.shape(x).to_vec(), self.nodes[x.0].requires_grad);
        Ok(self.push(data, shape, rg, Op::Scale { x, c }))
    }

    pub fn reshape(&mut self, x: Var, shape: Vec<usize>) -> Result<Var> {
        let numel: usize = shape.iter().product();
        if numel != self.data(x).len() {
            return Err(VqosError::shape(format!(
                "reshape: {:?} -> {shape:?} changes element count",
                self.shape(x)
            )));
        }
        let (data, rg) = (self.data(x).to_vec(), self.nodes[x.0].requires_grad);
        Ok(self.push(data, shape, rg, Op::Reshape { x }))
    }

    pub fn sum(&mut self, x: Var) -> Result<Var> {
        let s: f64 = self.data(x).iter().sum();
        let rg = self.nodes[x.0].requires_grad;
        Ok(self.push(vec![s], vec![1], rg, Op::Sum { x }))
    }

    // ---- losses ----

    fn check_pair(&self, a: Var, b_len: usize, op: &str) -> Result<()> {
        if self.data(a).is_empty() {
            return Err(VqosError::shape(format!("{op}: empty tensor")));
        }
        if self.data(a).len() != b_len {
            return Err(VqosError::shape(format!(
                "{op}: {} predictions vs {} targets",
                self.data(a).len(),
                b_len
            )));
        }
        Ok(())
    }

    /// Mean binary cross-entropy. Predictions clamped to
    /// [BCE_EPS, 1-BCE_EPS]; clamped entries get zero gradient.
    pub fn bce(&mut self, pred: Var, target: &[f64]) -> Result<Var> {
        self.check_pair(pred, target.len(), "bce")?;
        self.check_finite(pred, "bce")?;
        let n = target.len() as f64;
        let mut loss = 0.0;
        for (&p, &t) in self.data(pred).iter().zip(target.iter()) {
            let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
            loss -= t * p.ln() + (1.0 - t) * (1.0 - p).ln();
        }
        loss /= n;
        let rg = self.nodes[pred.0].requires_grad;
        Ok(self.push(vec![loss], vec![1], rg, Op::Bce { pred, target: target.to_vec() }))
    }

    /// Mean cross-entropy from raw logits [N,C] against class indices.
    pub fn cross_entropy(&mut self, logits: Var, targets: &[usize]) -> Result<Var> {
        let shape = self.shape(logits).to_vec();
        if shape.len() != 2 {
            return Err(VqosError::shape(format!("cross_entropy: logits must be [N,C], got {shape:?}")));
        }
        let (n, c) = (shape[0], shape[1]);
        if n == 0 {
            return Err(VqosError::shape("cross_entropy: empty batch".to_string()));
        }
        if targets.len() != n {
            return Err(VqosError::shape(format!("cross_entropy: {n} rows vs {} targets", targets.len())));
        }
        if let Some(&t) = targets.iter().find(|&&t| t >= c) {
            return Err(VqosError::InvalidArgument(format!("cross_entropy: class {t} out of range {c}")));
        }
        self.check_finite(logits, "cross_entropy")?;
        let mut loss = 0.0;
        for (row, &t) in self.data(logits).chunks(c).zip(targets.iter()) {
            let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + row.iter().map(|&v| (v - m).exp()).sum::<f64>().ln();
            loss += lse - row[t];
        }
        loss /= n as f64;
        let rg = self.nodes[logits.0].requires_grad;
        Ok(self.push(vec![loss], vec![1], rg, Op::CrossEntropy { logits, targets: targets.to_vec() }))
    }

    /// Mean absolute error.
    pub fn l1(&mut self, a: Var, b: Var) -> Result<Var> {
        self.check_pair(a, self.data(b).len(), "l1")?;
        let n = self.data(a).len() as f64;
        let loss: f64 = self
            .data(a)
            .iter()
            .zip(self.data(b).iter())
            .map(|(x, y)| (x - y).abs())
            .sum::<f64>()
            / n;
        let rg = self.any_grad(&[a, b]);
        Ok(self.push(vec![loss], vec![1], rg, Op::L1 { a, b }))
    }

    /// Mean squared error.
    pub fn mse(&mut self, a: Var, b: Var) -> Result<Var> {
        self.check_pair(a, self.data(b).len(), "mse")?;
        let n = self.data(a).len() as f64;
        let loss: f64 = self
            .data(a)
            .iter()
            .zip(self.data(b).iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            / n;
        let rg = self.any_grad(&[a, b]);
        Ok(self.push(vec![loss], vec![1], rg, Op::Mse { a, b }))
    }

    // ---- backward ----

    /// Reverse sweep from a scalar loss. Adds into node gradients; call
    /// `write_back_grad` afterwards to export into parameter tensors.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if self.data(loss).len() != 1 {
            return Err(VqosError::InvalidArgument(format!(
                "backward requires a scalar loss, got shape {:?}",
                self.shape(loss)
            )));
        }
        if !self.data(loss)[0].is_finite() {
            return Err(VqosError::NonFinite("backward: loss is not finite".into()));
        }
        self.nodes[loss.0].grad[0] += 1.0;
        for i in (0..=loss.0).rev() {
            if !self.nodes[i].requires_grad {
                continue;
            }
            if self.nodes[i].grad.iter().all(|&g| g == 0.0) {
                continue;
            }
            self.backprop_node(i);
        }
        Ok(())
    }

    fn backprop_node(&mut self, i: usize) {
        let op = self.nodes[i].op.clone();
        let gy = std::mem::take(&mut self.nodes[i].grad);
        match &op {
            Op::Leaf => {}
            Op::Conv2d { x, w, b, geom, in_hw } => {
                let (h, wd) = *in_hw;
                let n = self.nodes[x.0].shape[0];
                if self.nodes[x.0].requires_grad {
                    let gx = convkernel::conv_input_grad(&gy, n, h, wd, &self.nodes[w.0].data, geom);
                    add_into(&mut self.nodes[x.0].grad, &gx);
                }
                if self.nodes[w.0].requires_grad {
                    let gw = convkernel::conv_weight_grad(&self.nodes[x.0].data, &gy, n, h, wd, geom);
                    add_into(&mut self.nodes[w.0].grad, &gw);
                }
                if self.nodes[b.0].requires_grad {
                    let (ho, wo) = geom.out_hw(h, wd).unwrap();
                    let gb = convkernel::conv_bias_grad(&gy, n, geom.channels_out, ho * wo);
                    add_into(&mut self.nodes[b.0].grad, &gb);
                }
            }
            Op::ConvT2d { x, w, b, geom } => {
                // Forward was conv_input_grad, so its adjoint is conv_forward.
                let n = self.nodes[x.0].shape[0];
                let (ho, wo) = {
                    let s = &self.nodes[i].shape;
                    (s[2], s[3])
                };
                if self.nodes[x.0].requires_grad {
                    let gx = convkernel::conv_forward(&gy, n, ho, wo, &self.nodes[w.0].data, None, geom);
                    add_into(&mut self.nodes[x.0].grad, &gx);
                }
                if self.nodes[w.0].requires_grad {
                    // d/dW of col2im(W^T x): same as conv_weight_grad with the
                    // output gradient acting as the conv input.
                    let gw = convkernel::conv_weight_grad(&gy, &self.nodes[x.0].data, n, ho, wo, geom);
                    add_into(&mut self.nodes[w.0].grad, &gw);
                }
                if self.nodes[b.0].requires_grad {
                    let gb = convkernel::conv_bias_grad(&gy, n, geom.channels_in, ho * wo);
                    add_into(&mut self.nodes[b.0].grad, &gb);
                }
            }
            Op::Dense { x, w, b } => {
                let (n, f) = {
                    let s = &self.nodes[x.0].shape;
                    (s[0], s[1])
                };
                let g = self.nodes[w.0].shape[0];
                let gym = ArrayView2::from_shape((n, g), &gy[..]).unwrap();
                if self.nodes[x.0].requires_grad {
                    let wm = ArrayView2::from_shape((g, f), &self.nodes[w.0].data).unwrap();
                    let gx = gym.dot(&wm).into_raw_vec();
                    add_into(&mut self.nodes[x.0].grad, &gx);
                }
                if self.nodes[w.0].requires_grad {
                    let xm = ArrayView2::from_shape((n, f), &self.nodes[x.0].data).unwrap();
                    let gw = gym.t().dot(&xm).into_raw_vec();
                    add_into(&mut self.nodes[w.0].grad, &gw);
                }
                if self.nodes[b.0].requires_grad {
                    for ni in 0..n {
                        for gi in 0..g {
                            self.nodes[b.0].grad[gi] += gy[ni * g + gi];
                        }
                    }
                }
            }
            Op::Relu { x } => {
                for (j, &g) in gy.iter().enumerate() {
                    if self.nodes[x.0].data[j] > 0.0 {
                        self.nodes[x.0].grad[j] += g;
                    }
                }
            }
            Op::LeakyRelu { x, alpha } => {
                for (j, &g) in gy.iter().enumerate() {
                    let d = if self.nodes[x.0].data[j] >= 0.0 { 1.0 } else { *alpha };
                    self.nodes[x.0].grad[j] += g * d;
                }
            }
            Op::Sigmoid { x } => {
                for (j, &g) in gy.iter().enumerate() {
                    let y = self.nodes[i].data[j];
                    self.nodes[x.0].grad[j] += g * y * (1.0 - y);
                }
            }
            Op::Tanh { x } => {
                for (j, &g) in gy.iter().enumerate() {
                    let y = self.nodes[i].data[j];
                    self.nodes[x.0].grad[j] += g * (1.0 - y * y);
                }
            }
            Op::Softmax { x, row } => {
                let y = self.nodes[i].data.clone();
                for (r, (yr, gr)) in y.chunks(*row).zip(gy.chunks(*row)).enumerate() {
                    let dot: f64 = yr.iter().zip(gr.iter()).map(|(a, b)| a * b).sum();
                    for j in 0..*row {
                        self.nodes[x.0].grad[r * row + j] += yr[j] * (gr[j] - dot);
                    }
                }
            }
            Op::Add { a, b } => {
                if self.nodes[a.0].requires_grad {
                    add_into(&mut self.nodes[a.0].grad, &gy);
                }
                if self.nodes[b.0].requires_grad {
                    add_into(&mut self.nodes[b.0].grad, &gy);
                }
            }
            Op::Scale { x, c } => {
                for (j, &g) in gy.iter().enumerate() {
                    self.nodes[x.0].grad[j] += g * c;
                }
            }
            Op::Reshape { x } => {
                add_into(&mut self.nodes[x.0].grad, &gy);
            }
            Op::Sum { x } => {
                let g = gy[0];
                for v in self.nodes[x.0].grad.iter_mut() {
                    *v += g;
                }
            }
            Op::Bce { pred, target } => {
                let g0 = gy[0] / target.len() as f64;
                for (j, &t) in target.iter().enumerate() {
                    let p = self.nodes[pred.0].data[j];
                    if p <= BCE_EPS || p >= 1.0 - BCE_EPS {
                        continue; // clamped: zero gradient
                    }
                    self.nodes[pred.0].grad[j] += g0 * (p - t) / (p * (1.0 - p));
                }
            }
            Op::CrossEntropy { logits, targets } => {
                let c = self.nodes[logits.0].shape[1];
                let n = targets.len();
                let g0 = gy[0] / n as f64;
                let data = self.nodes[logits.0].data.clone();
                for (r, &t) in targets.iter().enumerate() {
                    let row = &data[r * c..(r + 1) * c];
                    let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let sum: f64 = row.iter().map(|&v| (v - m).exp()).sum();
                    for j in 0..c {
                        let p = (row[j] - m).exp() / sum;
                        let onehot = if j == t { 1.0 } else { 0.0 };
                        self.nodes[logits.0].grad[r * c + j] += g0 * (p - onehot);
                    }
                }
            }
            Op::L1 { a, b } => {
                let n = self.nodes[a.0].data.len() as f64;
                let g0 = gy[0] / n;
                for j in 0..self.nodes[a.0].data.len() {
                    let d = self.nodes[a.0].data[j] - self.nodes[b.0].data[j];
                    let s = if d > 0.0 {
                        1.0
                    } else if d < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    if self.nodes[a.0].requires_grad {
                        self.nodes[a.0].grad[j] += g0 * s;
                    }
                    if self.nodes[b.0].requires_grad {
                        self.nodes[b.0].grad[j] -= g0 * s;
                    }
                }
            }
            Op::Mse { a, b } => {
                let n = self.nodes[a.0].data.len() as f64;
                let g0 = gy[0] * 2.0 / n;
                for j in 0..self.nodes[a.0].data.len() {
                    let d = self.nodes[a.0].data[j] - self.nodes[b.0].data[j];
                    if self.nodes[a.0].requires_grad {
                        self.nodes[a.0].grad[j] += g0 * d;
                    }
                    if self.nodes[b.0].requires_grad {
                        self.nodes[b.0].grad[j] -= g0 * d;
                    }
                }
            }
        }
        self.nodes[i].grad = gy;
    }
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src.iter()) {
        *d += *s;
    }
}
