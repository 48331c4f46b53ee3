//! Frame type and binary PGM persistence.

use crate::error::{Result, VqosError};
use std::fs;
use std::io::Write;
use std::path::Path;

/// H×W×C image with values in [0,1], row-major, channel-major planes.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub pixels: Vec<f64>,
}

impl Frame {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<f64>) -> Result<Self> {
        if width * height * channels != pixels.len() {
            return Err(VqosError::shape(format!(
                "frame {width}x{height}x{channels} needs {} pixels, got {}",
                width * height * channels,
                pixels.len()
            )));
        }
        if pixels.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(VqosError::InvalidArgument("frame pixel outside [0,1]".into()));
        }
        Ok(Frame { width, height, channels, pixels })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Self {
        Frame { width, height, channels, pixels: vec![value; width * height * channels] }
    }

    pub fn numel(&self) -> usize {
        self.pixels.len()
    }

    /// Toroidal translation by (dx, dy) pixels. Shifts that are multiples
    /// of the emulator block size map block-aligned artifacts onto the
    /// block grid again, so labels are preserved.
    pub fn circular_shift(&self, dx: usize, dy: usize) -> Frame {
        let (w, h, c) = (self.width, self.height, self.channels);
        let mut pixels = vec![0.0; self.numel()];
        for plane in 0..c {
            for y in 0..h {
                let sy = (y + h - dy % h) % h;
                for x in 0..w {
                    let sx = (x + w - dx % w) % w;
                    pixels[plane * w * h + y * w + x] = self.pixels[plane * w * h + sy * w + sx];
                }
            }
        }
        Frame { width: w, height: h, channels: c, pixels }
    }

    /// Deterministic quantization to 8 bits: floor(p*255 + 0.5).
    pub fn to_u8(&self) -> Vec<u8> {
        self.pixels.iter().map(|&p| (p * 255.0 + 0.5).floor() as u8).collect()
    }

    pub fn from_u8(width: usize, height: usize, channels: usize, bytes: &[u8]) -> Result<Self> {
        let pixels = bytes.iter().map(|&b| b as f64 / 255.0).collect();
        Frame::new(width, height, channels, pixels)
    }

    /// Write as binary PGM (P5, maxval 255). Grayscale frames only.
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        if self.channels != 1 {
            return Err(VqosError::InvalidArgument(format!(
                "PGM supports 1 channel, frame has {}",
                self.channels
            )));
        }
        let mut buf = Vec::with_capacity(self.numel() + 32);
        write!(buf, "P5\n{} {}\n255\n", self.width, self.height)
            .expect("writing to Vec cannot fail");
        buf.extend_from_slice(&self.to_u8());
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| VqosError::io(dir.display().to_string(), e))?;
        }
        fs::write(path, buf).map_err(|e| VqosError::io(path.display().to_string(), e))
    }

    pub fn read_pgm(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| VqosError::io(path.display().to_string(), e))?;
        Self::parse_pgm(&bytes).map_err(|e| match e {
            VqosError::Codec(msg) => VqosError::Codec(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse_pgm(bytes: &[u8]) -> Result<Self> {
        let err = |m: &str| VqosError::Codec(format!("invalid PGM: {m}"));
        // header = three whitespace-separated tokens after "P5", '#' comments allowed
        if bytes.len() < 2 || &bytes[..2] != b"P5" {
            return Err(err("missing P5 magic"));
        }
        let mut pos = 2;
        let mut tokens = Vec::new();
        while tokens.len() < 3 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(err("truncated header"));
            }
            let tok = std::str::from_utf8(&bytes[start..pos]).map_err(|_| err("non-ascii header"))?;
            tokens.push(tok.parse::<usize>().map_err(|_| err("non-numeric header field"))?);
        }
        pos += 1; // single whitespace after maxval
        let (width, height, maxval) = (tokens[0], tokens[1], tokens[2]);
        if maxval != 255 {
            return Err(err("maxval must be 255"));
        }
        if bytes.len() < pos || bytes.len() - pos != width * height {
            return Err(err("pixel payload size mismatch"));
        }
        Frame::from_u8(width, height, 1, &bytes[pos..])
    }
}

/// Peak signal-to-noise ratio in dB for [0,1] frames. Identical frames
/// report +infinity.
pub fn psnr(a: &Frame, b: &Frame) -> Result<f64> {
    if a.width != b.width || a.height != b.height || a.channels != b.channels {
        return Err(VqosError::shape(format!(
            "psnr: {}x{}x{} vs {}x{}x{}",
            a.width, a.height, a.channels, b.width, b.height, b.channels
        )));
    }
    let mse: f64 = a
        .pixels
        .iter()
        .zip(b.pixels.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / a.numel() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (1.0 / mse).log10())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circular_shift_permutes_and_composes_back() {
        let pixels: Vec<f64> = (0..48).map(|i| i as f64 / 47.0).collect();
        let f = Frame::new(8, 6, 1, pixels).unwrap();
        let s = f.circular_shift(3, 2);
        assert_eq!(s.pixels[2 * 8 + 3], f.pixels[0]);
        let mut a = s.pixels.clone();
        let mut b = f.pixels.clone();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert_eq!(a, b, "shift must permute pixels");
        assert_eq!(s.circular_shift(5, 4), f, "inverse shift restores the frame");
        assert_eq!(f.circular_shift(0, 0), f);
        assert_eq!(f.circular_shift(8, 6), f, "full-period shift is identity");
    }

    #[test]
    fn pgm_round_trip_is_exact() {
        let pixels: Vec<f64> = (0..64).map(|i| i as f64 / 63.0).collect();
        let f = Frame::new(8, 8, 1, pixels).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.pgm");
        f.write_pgm(&path).unwrap();
        let g = Frame::read_pgm(&path).unwrap();
        assert_eq!(f.to_u8(), g.to_u8());
    }

    #[test]
    fn malformed_pgm_rejected() {
        assert!(Frame::parse_pgm(b"P6\n2 2\n255\nxxxx").is_err());
        assert!(Frame::parse_pgm(b"P5\n2 2\n255\nxxx").is_err());
        assert!(Frame::parse_pgm(b"P5\n2 two\n255\nxxxx").is_err());
    }

    #[test]
    fn psnr_closed_forms() {
        let a = Frame::filled(4, 4, 1, 0.0);
        let b = Frame::filled(4, 4, 1, 0.5);
        assert!((psnr(&a, &b).unwrap() - 10.0 * (1.0f64 / 0.25).log10()).abs() < 1e-12);
        assert!(psnr(&a, &a).unwrap().is_infinite());
        // MSE 0.01 -> 20 dB
        let c = Frame::filled(4, 4, 1, 0.1);
        assert!((psnr(&a, &c).unwrap() - 20.0).abs() < 1e-12);
        // symmetry
        assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
    }
}
