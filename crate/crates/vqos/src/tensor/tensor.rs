//! Dense row-major f64 tensor, the substrate for all training.

use crate::error::{Result, VqosError};

/// n-dimensional array of f64 with an optional gradient buffer.
///
/// Gradients are accumulated: `backward` and `Graph::write_back_grad` add
/// into `grad`; callers zero it explicitly (`zero_grad`) before a fresh pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
    pub grad: Option<Vec<f64>>,
    pub requires_grad: bool,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let numel: usize = shape.iter().product();
        if shape.iter().any(|&d| d == 0) {
            return Err(VqosError::shape(format!("zero-sized dimension in {shape:?}")));
        }
        if numel != data.len() {
            return Err(VqosError::shape(format!(
                "shape {shape:?} implies {numel} elements, got {}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(VqosError::NonFinite(format!("tensor contains {bad}")));
        }
        Ok(Tensor { shape, data, grad: None, requires_grad: false })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let numel = shape.iter().product();
        Tensor { shape, data: vec![0.0; numel], grad: None, requires_grad: false }
    }

    pub fn full(shape: Vec<usize>, value: f64) -> Self {
        let numel = shape.iter().product();
        Tensor { shape, data: vec![value; numel], grad: None, requires_grad: false }
    }

    pub fn scalar(value: f64) -> Self {
        Tensor { shape: vec![1], data: vec![value], grad: None, requires_grad: false }
    }

    /// Mark as a trainable parameter with a zeroed gradient buffer.
    pub fn with_grad(mut self) -> Self {
        self.requires_grad = true;
        self.grad = Some(vec![0.0; self.data.len()]);
        self
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn zero_grad(&mut self) {
        if let Some(g) = &mut self.grad {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
    }

    pub fn grad_ref(&self) -> &[f64] {
        self.grad.as_deref().expect("tensor has no gradient buffer")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_product_must_match_data_len() {
        assert!(Tensor::new(vec![2, 3], vec![0.0; 6]).is_ok());
        assert!(Tensor::new(vec![2, 3], vec![0.0; 5]).is_err());
        assert!(Tensor::new(vec![2, 0], vec![]).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(Tensor::new(vec![2], vec![1.0, f64::NAN]).is_err());
        assert!(Tensor::new(vec![2], vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn zero_grad_clears_accumulator() {
        let mut t = Tensor::new(vec![2], vec![1.0, 2.0]).unwrap().with_grad();
        t.grad.as_mut().unwrap()[0] = 3.0;
        t.zero_grad();
        assert_eq!(t.grad_ref(), &[0.0, 0.0]);
    }
}
