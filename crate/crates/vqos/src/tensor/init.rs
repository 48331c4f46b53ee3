//! Seeded weight initialization.

use super::tensor::Tensor;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// He-uniform: U(-sqrt(6/fan_in), +sqrt(6/fan_in)). For layers feeding
/// ReLU-family activations.
pub fn he_uniform(shape: Vec<usize>, fan_in: usize, rng: &mut ChaCha8Rng) -> Tensor {
    let bound = (6.0 / fan_in as f64).sqrt();
    uniform(shape, bound, rng)
}

/// Xavier-uniform: U(-sqrt(6/(fan_in+fan_out)), ...). For sigmoid/tanh heads.
pub fn xavier_uniform(shape: Vec<usize>, fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) -> Tensor {
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    uniform(shape, bound, rng)
}

fn uniform(shape: Vec<usize>, bound: f64, rng: &mut ChaCha8Rng) -> Tensor {
    let numel: usize = shape.iter().product();
    let data: Vec<f64> = (0..numel).map(|_| rng.gen_range(-bound..bound)).collect();
    Tensor::new(shape, data).expect("init shape is consistent").with_grad()
}

pub fn zeros_param(shape: Vec<usize>) -> Tensor {
    Tensor::zeros(shape).with_grad()
}
