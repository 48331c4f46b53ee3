//! Deterministic synthetic video generation.
//!
//! Each motif is a static textured background plus a small deterministic
//! per-frame motion, so consecutive frames are temporally coherent and a
//! previous decoded frame is a sensible concealment reference.

use super::frame::Frame;
use crate::error::{Result, VqosError};
use crate::seed::rng_for;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

pub const RECT_SPEED: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Motif {
    MovingRectangle,
    MovingDisc,
    GradientNoise,
    CheckerDrift,
}

impl FromStr for Motif {
    type Err = VqosError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "moving-rectangle" => Ok(Motif::MovingRectangle),
            "moving-disc" => Ok(Motif::MovingDisc),
            "gradient-noise" => Ok(Motif::GradientNoise),
            "checker-drift" => Ok(Motif::CheckerDrift),
            other => Err(VqosError::InvalidArgument(format!(
                "unknown motif '{other}' (expected moving-rectangle, moving-disc, gradient-noise, checker-drift)"
            ))),
        }
    }
}

impl std::fmt::Display for Motif {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Motif::MovingRectangle => "moving-rectangle",
            Motif::MovingDisc => "moving-disc",
            Motif::GradientNoise => "gradient-noise",
            Motif::CheckerDrift => "checker-drift",
        };
        f.write_str(s)
    }
}

/// Generate `n_frames` of a grayscale synthetic video. Bit-identical per
/// (seed, n_frames, size, motif).
pub fn gen_video(seed: u64, n_frames: usize, width: usize, height: usize, motif: Motif) -> Result<Vec<Frame>> {
    if n_frames == 0 {
        return Err(VqosError::InvalidArgument("gen_video: n_frames must be >= 1".into()));
    }
    if width < 8 || height < 8 {
        return Err(VqosError::InvalidArgument("gen_video: frames must be at least 8x8".into()));
    }
    let mut rng = rng_for(seed, 0x76_69_64, motif as u64, 0);
    // static texture so the rate classes leave a visible quantization
    // signature everywhere, not just on the moving object
    let noise: Vec<f64> = (0..width * height).map(|_| rng.gen_range(-0.12..0.12)).collect();
    let background: Vec<f64> = (0..width * height)
        .map(|i| {
            let (x, y) = (i % width, i / width);
            let g = 0.35 + 0.3 * (x as f64 / width as f64) + 0.15 * (y as f64 / height as f64);
            (g + noise[i]).clamp(0.0, 1.0)
        })
        .collect();

    let mut frames = Vec::with_capacity(n_frames);
    for t in 0..n_frames {
        let mut px = background.clone();
        match motif {
            Motif::MovingRectangle => {
                let (rw, rh) = (width / 4, height / 5);
                let x0 = (t * RECT_SPEED) % width;
                let y0 = height / 3;
                for dy in 0..rh {
                    for dx in 0..rw {
                        let x = (x0 + dx) % width;
                        px[(y0 + dy) * width + x] = 0.92;
                    }
                }
            }
            Motif::MovingDisc => {
                let r = (height / 6) as isize;
                let cx = ((t * RECT_SPEED) % width) as isize;
                let cy = ((height / 2) + (t % (height / 4))) as isize;
                for dy in -r..=r {
                    for dx in -r..=r {
                        if dx * dx + dy * dy <= r * r {
                            let x = (cx + dx).rem_euclid(width as isize) as usize;
                            let y = (cy + dy).rem_euclid(height as isize) as usize;
                            px[y * width + x] = 0.08;
                        }
                    }
                }
            }
            Motif::GradientNoise => {
                // smooth diagonal sinusoid drifting 3 px per frame over a
                // static low-amplitude noise texture. The whole frame changes
                // every frame, so a concealment block copied from a previous
                // frame shows a visible low-frequency offset, while the
                // underlying content stays easy to reconstruct.
                let period = 32.0;
                for y in 0..height {
                    for x in 0..width {
                        let phase = ((x + y) as f64 + 3.0 * t as f64) / period;
                        let base = 0.5 + 0.32 * (std::f64::consts::TAU * phase).sin();
                        px[y * width + x] = (base + 0.25 * noise[y * width + x]).clamp(0.0, 1.0);
                    }
                }
            }
            Motif::CheckerDrift => {
                // cell size matches the emulator's default concealment block,
                // so every concealed block carries a visibly misaligned edge
                let cell = 4;
                for y in 0..height {
                    for x in 0..width {
                        let cx = (x + t) / cell;
                        let cy = (y + t) / cell;
                        let v = if (cx + cy) % 2 == 0 { 0.75 } else { 0.25 };
                        px[y * width + x] = (v + noise[y * width + x]).clamp(0.0, 1.0);
                    }
                }
            }
        }
        frames.push(Frame::new(width, height, 1, px)?);
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_is_bit_identical() {
        for motif in [Motif::MovingRectangle, Motif::MovingDisc, Motif::GradientNoise, Motif::CheckerDrift] {
            let a = gen_video(5, 4, 32, 32, motif).unwrap();
            let b = gen_video(5, 4, 32, 32, motif).unwrap();
            assert_eq!(a, b);
        }
        assert_ne!(
            gen_video(5, 1, 32, 32, Motif::MovingRectangle).unwrap(),
            gen_video(6, 1, 32, 32, Motif::MovingRectangle).unwrap()
        );
    }

    #[test]
    fn single_frame_is_valid() {
        let v = gen_video(1, 1, 64, 64, Motif::GradientNoise).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].numel(), 64 * 64);
    }

    #[test]
    fn rectangle_motion_changes_bounded_pixel_count() {
        let (w, h) = (64, 64);
        let v = gen_video(9, 10, w, h, Motif::MovingRectangle).unwrap();
        let (rw, rh) = (w / 4, h / 5);
        let perimeter = 2 * (rw + rh);
        for t in 0..9 {
            let diff = v[t]
                .pixels
                .iter()
                .zip(v[t + 1].pixels.iter())
                .filter(|(a, b)| a != b)
                .count();
            assert!(
                diff <= 2 * perimeter * RECT_SPEED,
                "frame {t}->{}: {diff} pixels changed, bound {}",
                t + 1,
                2 * perimeter * RECT_SPEED
            );
            assert!(diff > 0, "motion must change something");
        }
    }

    #[test]
    fn unknown_motif_string_rejected() {
        assert!("moving-rectangle".parse::<Motif>().is_ok());
        assert!("spinning-cube".parse::<Motif>().is_err());
    }
}
