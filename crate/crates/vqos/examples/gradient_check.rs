//! Verify the autodiff engine against central finite differences on a small
//! conv -> relu -> dense -> cross-entropy stack.

use vqos::seed::rng_for;
use vqos::tensor::{he_uniform, xavier_uniform, zeros_param, Graph, Tensor};

fn loss_value(x: &Tensor, w: &Tensor, b: &Tensor, dw: &Tensor, db: &Tensor) -> f64 {
    let mut g = Graph::new();
    let xv = g.leaf(x);
    let wv = g.leaf(w);
    let bv = g.leaf(b);
    let dwv = g.leaf(dw);
    let dbv = g.leaf(db);
    let h = g.conv2d(xv, wv, bv, 2, 1).unwrap();
    let h = g.relu(h).unwrap();
    let h = g.reshape(h, vec![2, 4 * 4 * 4]).unwrap();
    let logits = g.dense(h, dwv, dbv).unwrap();
    let loss = g.cross_entropy(logits, &[0, 2]).unwrap();
    g.scalar_value(loss)
}

fn main() {
    let mut rng = rng_for(11, 0, 0, 0);
    let x = {
        let t = he_uniform(vec![2, 3, 8, 8], 3, &mut rng);
        Tensor::new(t.shape.clone(), t.data.clone()).unwrap()
    };
    let mut w = he_uniform(vec![4, 3, 3, 3], 27, &mut rng);
    let b = zeros_param(vec![4]);
    let dw = xavier_uniform(vec![3, 64], 64, 3, &mut rng);
    let db = zeros_param(vec![3]);

    // analytic gradient of the conv weight
    let mut g = Graph::new();
    let xv = g.leaf(&x);
    let wv = g.leaf(&w);
    let bv = g.leaf(&b);
    let dwv = g.leaf(&dw);
    let dbv = g.leaf(&db);
    let h = g.conv2d(xv, wv, bv, 2, 1).unwrap();
    let h = g.relu(h).unwrap();
    let h = g.reshape(h, vec![2, 4 * 4 * 4]).unwrap();
    let logits = g.dense(h, dwv, dbv).unwrap();
    let loss = g.cross_entropy(logits, &[0, 2]).unwrap();
    g.backward(loss).unwrap();
    g.write_back_grad(wv, &mut w);

    let eps = 1e-6;
    let mut worst: f64 = 0.0;
    for i in (0..w.numel()).step_by(7) {
        let orig = w.data[i];
        w.data[i] = orig + eps;
        let up = loss_value(&x, &w, &b, &dw, &db);
        w.data[i] = orig - eps;
        let down = loss_value(&x, &w, &b, &dw, &db);
        w.data[i] = orig;
        let fd = (up - down) / (2.0 * eps);
        let an = w.grad_ref()[i];
        let rel = (fd - an).abs() / an.abs().max(fd.abs()).max(1e-8);
        worst = worst.max(rel);
        println!("w[{i:>3}] analytic {an:>12.8} fd {fd:>12.8} rel err {rel:.2e}");
    }
    println!("worst relative error: {worst:.2e}");
    assert!(worst < 1e-4, "gradient check failed");
    println!("gradient check passed");
}
