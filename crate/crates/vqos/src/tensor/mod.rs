//! Minimal deterministic tensor engine with reverse-mode differentiation.
//!
//! Everything trains in f64. Ops are pure functions of their inputs; a
//! `Graph` is a single-threaded tape built per training step.

mod convkernel;
mod graph;
mod init;
mod optim;
#[allow(clippy::module_inception)]
mod tensor;

pub use graph::{Graph, Var, BCE_EPS};
pub use init::{he_uniform, xavier_uniform, zeros_param};
pub use optim::AdamState;
pub use tensor::Tensor;

/// Hyperparameters of one conv/dense layer, bundled with its tensors.
#[derive(Debug, Clone)]
pub struct LayerParams {
    pub weight: Tensor,
    pub bias: Tensor,
    pub stride: usize,
    pub pad: usize,
}

impl LayerParams {
    pub fn new(weight: Tensor, bias: Tensor, stride: usize, pad: usize) -> Self {
        LayerParams { weight, bias, stride, pad }
    }

    pub fn zero_grad(&mut self) {
        self.weight.zero_grad();
        self.bias.zero_grad();
    }
}
