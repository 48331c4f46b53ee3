//! im2col-based convolution kernels shared by conv2d and conv_transpose2d.
//!
//! Three primitives cover forward and both gradients:
//!   conv_forward      y  = W * im2col(x)
//!   conv_input_grad   gx = col2im(W^T * gy)
//!   conv_weight_grad  gW = gy * im2col(x)^T
//! conv_transpose2d is conv_input_grad used as a forward pass, so the
//! adjoint identity between the two ops holds by construction.

use ndarray::{Array2, ArrayView2};

#[derive(Debug, Clone, Copy)]
pub struct ConvGeom {
    pub channels_in: usize,
    pub channels_out: usize,
    pub kh: usize,
    pub kw: usize,
    pub stride: usize,
    pub pad: usize,
}

impl ConvGeom {
    pub fn out_hw(&self, h: usize, w: usize) -> Option<(usize, usize)> {
        let he = h + 2 * self.pad;
        let we = w + 2 * self.pad;
        if he < self.kh || we < self.kw {
            return None;
        }
        Some(((he - self.kh) / self.stride + 1, (we - self.kw) / self.stride + 1))
    }

    /// Output size of the transposed direction: (h-1)*stride - 2p + kh.
    pub fn transpose_out_hw(&self, h: usize, w: usize) -> Option<(usize, usize)> {
        let ho = (h - 1) * self.stride + self.kh;
        let wo = (w - 1) * self.stride + self.kw;
        if ho < 2 * self.pad || wo < 2 * self.pad {
            return None;
        }
        Some((ho - 2 * self.pad, wo - 2 * self.pad))
    }
}

/// Unfold one sample [C,H,W] into [C*kh*kw, Ho*Wo].
fn im2col(x: &[f64], c: usize, h: usize, w: usize, g: &ConvGeom, ho: usize, wo: usize) -> Array2<f64> {
    let mut col = Array2::<f64>::zeros((c * g.kh * g.kw, ho * wo));
    for ci in 0..c {
        let plane = &x[ci * h * w..(ci + 1) * h * w];
        for ki in 0..g.kh {
            for kj in 0..g.kw {
                let row = (ci * g.kh + ki) * g.kw + kj;
                for oy in 0..ho {
                    let iy = (oy * g.stride + ki) as isize - g.pad as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    let iy = iy as usize;
                    for ox in 0..wo {
                        let ix = (ox * g.stride + kj) as isize - g.pad as isize;
                        if ix < 0 || ix >= w as isize {
                            continue;
                        }
                        col[(row, oy * wo + ox)] = plane[iy * w + ix as usize];
                    }
                }
            }
        }
    }
    col
}

/// Adjoint of im2col: scatter-add [C*kh*kw, Ho*Wo] back into [C,H,W].
fn col2im(col: &ArrayView2<f64>, c: usize, h: usize, w: usize, g: &ConvGeom, ho: usize, wo: usize, out: &mut [f64]) {
    for ci in 0..c {
        for ki in 0..g.kh {
            for kj in 0..g.kw {
                let row = (ci * g.kh + ki) * g.kw + kj;
                for oy in 0..ho {
                    let iy = (oy * g.stride + ki) as isize - g.pad as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    let base = ci * h * w + iy as usize * w;
                    for ox in 0..wo {
                        let ix = (ox * g.stride + kj) as isize - g.pad as isize;
                        if ix < 0 || ix >= w as isize {
                            continue;
                        }
                        out[base + ix as usize] += col[(row, oy * wo + ox)];
                    }
                }
            }
        }
    }
}

/// y[N,K,Ho,Wo] = conv(x[N,C,H,W], weight[K,C,kh,kw]) + bias[K].
pub fn conv_forward(
    x: &[f64],
    n: usize,
    h: usize,
    w: usize,
    weight: &[f64],
    bias: Option<&[f64]>,
    g: &ConvGeom,
) -> Vec<f64> {
    let (ho, wo) = g.out_hw(h, w).expect("geometry checked by caller");
    let c = g.channels_in;
    let k = g.channels_out;
    let wmat = ArrayView2::from_shape((k, c * g.kh * g.kw), weight).unwrap();
    let mut y = vec![0.0; n * k * ho * wo];
    let sample = c * h * w;
    let osample = k * ho * wo;
    for ni in 0..n {
        let col = im2col(&x[ni * sample..(ni + 1) * sample], c, h, w, g, ho, wo);
        let out = wmat.dot(&col); // [K, Ho*Wo]
        let dst = &mut y[ni * osample..(ni + 1) * osample];
        for (d, s) in dst.iter_mut().zip(out.iter()) {
            *d = *s;
        }
        if let Some(b) = bias {
            for ki in 0..k {
                let plane = &mut dst[ki * ho * wo..(ki + 1) * ho * wo];
                for v in plane.iter_mut() {
                    *v += b[ki];
                }
            }
        }
    }
    y
}

/// gx[N,C,H,W] = adjoint of conv_forward applied to gy[N,K,Ho,Wo].
pub fn conv_input_grad(
    gy: &[f64],
    n: usize,
    h: usize,
    w: usize,
    weight: &[f64],
    g: &ConvGeom,
) -> Vec<f64> {
    let (ho, wo) = g.out_hw(h, w).expect("geometry checked by caller");
    let c = g.channels_in;
    let k = g.channels_out;
    let wmat = ArrayView2::from_shape((k, c * g.kh * g.kw), weight).unwrap();
    let mut gx = vec![0.0; n * c * h * w];
    let sample = c * h * w;
    let osample = k * ho * wo;
    for ni in 0..n {
        let gmat = ArrayView2::from_shape((k, ho * wo), &gy[ni * osample..(ni + 1) * osample]).unwrap();
        let col = wmat.t().dot(&gmat); // [C*kh*kw, Ho*Wo]
        col2im(&col.view(), c, h, w, g, ho, wo, &mut gx[ni * sample..(ni + 1) * sample]);
    }
    gx
}

/// gW[K,C,kh,kw] accumulated over the batch.
pub fn conv_weight_grad(
    x: &[f64],
    gy: &[f64],
    n: usize,
    h: usize,
    w: usize,
    g: &ConvGeom,
) -> Vec<f64> {
    let (ho, wo) = g.out_hw(h, w).expect("geometry checked by caller");
    let c = g.channels_in;
    let k = g.channels_out;
    let mut gw = Array2::<f64>::zeros((k, c * g.kh * g.kw));
    let sample = c * h * w;
    let osample = k * ho * wo;
    for ni in 0..n {
        let col = im2col(&x[ni * sample..(ni + 1) * sample], c, h, w, g, ho, wo);
        let gmat = ArrayView2::from_shape((k, ho * wo), &gy[ni * osample..(ni + 1) * osample]).unwrap();
        gw = gw + gmat.dot(&col.t());
    }
    gw.into_raw_vec()
}

/// gb[K]: sum of gy over batch and spatial positions.
pub fn conv_bias_grad(gy: &[f64], n: usize, k: usize, spatial: usize) -> Vec<f64> {
    let mut gb = vec![0.0; k];
    for ni in 0..n {
        for ki in 0..k {
            let base = (ni * k + ki) * spatial;
            gb[ki] += gy[base..base + spatial].iter().sum::<f64>();
        }
    }
    gb
}
