//! Adam optimizer with bias correction.

use super::tensor::Tensor;
use crate::error::{Result, VqosError};

/// Per-parameter-set Adam state. One moment pair per tensor, indexed in the
/// order the parameters are handed to `step`.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(lr: f64) -> Self {
        AdamState { lr, beta1: 0.9, beta2: 0.999, epsilon: 1e-8, step: 0, m: Vec::new(), v: Vec::new() }
    }

    /// Apply one Adam update to every parameter from its accumulated
    /// gradient, then advance the step counter. Gradients are left
    /// untouched; callers zero them before the next backward pass.
    pub fn step(&mut self, params: &mut [&mut Tensor]) -> Result<()> {
        if self.m.is_empty() {
            self.m = params.iter().map(|p| vec![0.0; p.numel()]).collect();
            self.v = params.iter().map(|p| vec![0.0; p.numel()]).collect();
        }
        if self.m.len() != params.len() {
            return Err(VqosError::shape(format!(
                "adam: state tracks {} tensors, got {}",
                self.m.len(),
                params.len()
            )));
        }
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for (idx, p) in params.iter_mut().enumerate() {
            let g = p
                .grad
                .as_ref()
                .ok_or_else(|| VqosError::InvalidArgument("adam: parameter has no gradient".into()))?;
            if g.len() != p.data.len() || self.m[idx].len() != p.data.len() {
                return Err(VqosError::shape(format!(
                    "adam: tensor {idx} has {} values, grad {}, state {}",
                    p.data.len(),
                    g.len(),
                    self.m[idx].len()
                )));
            }
            let (m, v) = (&mut self.m[idx], &mut self.v[idx]);
            for j in 0..p.data.len() {
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * g[j];
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * g[j] * g[j];
                let mhat = m[j] / bc1;
                let vhat = v[j] / bc2;
                p.data[j] -= self.lr * mhat / (vhat.sqrt() + self.epsilon);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params_unchanged() {
        let mut p = Tensor::new(vec![3], vec![1.0, -2.0, 3.0]).unwrap().with_grad();
        let before = p.data.clone();
        let mut adam = AdamState::new(0.01);
        adam.step(&mut [&mut p]).unwrap();
        assert_eq!(p.data, before);
        assert_eq!(adam.step, 1);
    }

    #[test]
    fn first_step_matches_closed_form() {
        // With constant gradient g, bias correction makes the first update
        // exactly -lr * g / (|g| + eps') with eps' = eps (vhat = g^2).
        let lr = 0.002;
        let g = 0.7;
        let mut p = Tensor::new(vec![2], vec![0.5, -0.25]).unwrap().with_grad();
        p.grad = Some(vec![g, -g]);
        let mut adam = AdamState::new(lr);
        adam.step(&mut [&mut p]).unwrap();
        let expect = lr * g / (g + adam.epsilon);
        assert!((p.data[0] - (0.5 - expect)).abs() < 1e-9);
        assert!((p.data[1] - (-0.25 + expect)).abs() < 1e-9);
    }

    #[test]
    fn repeated_runs_are_bit_identical() {
        let run = || {
            let mut p = Tensor::new(vec![2], vec![0.3, -0.8]).unwrap().with_grad();
            let mut adam = AdamState::new(0.01);
            for k in 0..10 {
                p.grad = Some(vec![0.1 * (k as f64 + 1.0), -0.05]);
                adam.step(&mut [&mut p]).unwrap();
            }
            p.data
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut p = Tensor::new(vec![2], vec![0.0; 2]).unwrap().with_grad();
        let mut q = Tensor::new(vec![3], vec![0.0; 3]).unwrap().with_grad();
        let mut adam = AdamState::new(0.01);
        adam.step(&mut [&mut p]).unwrap();
        assert!(adam.step(&mut [&mut q, &mut p]).is_err());
    }
}
