//! Binary checkpoint container.
//!
//! Layout (all integers little-endian):
//!   magic "VQOS" | version u32 | meta_len u32 | meta JSON |
//!   per tensor: name_len u32 | name | rank u32 | dims u32... | f32 data |
//!   crc32 u32 over everything above
//!
//! Tensors appear in the model's canonical parameter order. Values are
//! stored as f32; loading widens back to f64, so save -> load -> save is
//! byte-stable.

use crate::emulator::ClassSets;
use crate::error::{Result, VqosError};
use crate::tensor::Tensor;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

pub const CKPT_MAGIC: &[u8; 4] = b"VQOS";
pub const CKPT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub model_kind: String,
    pub width: usize,
    pub height: usize,
    pub latent: usize,
    pub classes: ClassSets,
    pub corpus_hash: u32,
    pub seed: u64,
    pub param_count: usize,
}

fn bad(msg: impl Into<String>) -> VqosError {
    VqosError::Checkpoint(msg.into())
}

pub fn save_checkpoint(path: &Path, meta: &CheckpointMeta, params: &[(String, &Tensor)]) -> Result<()> {
    let mut meta = meta.clone();
    meta.param_count = params.len();
    let meta_json = serde_json::to_vec(&meta).expect("meta serializes");
    let mut buf = Vec::new();
    buf.extend_from_slice(CKPT_MAGIC);
    buf.extend_from_slice(&CKPT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(meta_json.len() as u32).to_le_bytes());
    buf.extend_from_slice(&meta_json);
    for (name, t) in params {
        buf.extend_from_slice(&(name.len() as u32).to_le_bytes());
        buf.extend_from_slice(name.as_bytes());
        buf.extend_from_slice(&(t.shape.len() as u32).to_le_bytes());
        for &d in &t.shape {
            buf.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in &t.data {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| VqosError::io(dir.display().to_string(), e))?;
        }
    }
    fs::write(path, buf).map_err(|e| VqosError::io(path.display().to_string(), e))
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(bad("checkpoint truncated"));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
}

pub fn load_checkpoint(path: &Path) -> Result<(CheckpointMeta, Vec<(String, Tensor)>)> {
    let raw = fs::read(path).map_err(|e| VqosError::io(path.display().to_string(), e))?;
    if raw.len() < 16 {
        return Err(bad(format!("{}: too short to be a checkpoint", path.display())));
    }
    let (body, crc_bytes) = raw.split_at(raw.len() - 4);
    let stored = u32::from_le_bytes(crc_bytes.try_into().unwrap());
    let actual = crc32fast::hash(body);
    if stored != actual {
        return Err(bad(format!("{}: crc mismatch (stored {stored:#x}, actual {actual:#x})", path.display())));
    }
    let mut r = Reader { buf: body, pos: 0 };
    if r.take(4)? != CKPT_MAGIC {
        return Err(bad(format!("{}: bad magic", path.display())));
    }
    let version = r.u32()?;
    if version != CKPT_VERSION {
        return Err(bad(format!("unsupported checkpoint version {version}")));
    }
    let meta_len = r.u32()? as usize;
    let meta: CheckpointMeta =
        serde_json::from_slice(r.take(meta_len)?).map_err(|e| bad(format!("bad checkpoint metadata: {e}")))?;
    let mut params = Vec::new();
    while r.remaining() > 0 {
        let name_len = r.u32()? as usize;
        let name = String::from_utf8(r.take(name_len)?.to_vec())
            .map_err(|_| bad("non-utf8 parameter name"))?;
        let rank = r.u32()? as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(r.u32()? as usize);
        }
        let numel: usize = shape.iter().product();
        let raw_f32 = r.take(numel * 4)?;
        let data: Vec<f64> = raw_f32
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        params.push((name, Tensor::new(shape, data)?.with_grad()));
    }
    if params.len() != meta.param_count {
        return Err(bad(format!(
            "checkpoint lists {} parameters, metadata promises {}",
            params.len(),
            meta.param_count
        )));
    }
    Ok((meta, params))
}

/// Copy loaded tensors into a freshly built model's parameters, matching by
/// canonical order and verifying names and shapes.
pub fn assign_params(loaded: Vec<(String, Tensor)>, expect: Vec<(String, &Tensor)>, dst: Vec<&mut Tensor>) -> Result<()> {
    if loaded.len() != expect.len() {
        return Err(bad(format!("checkpoint has {} parameters, model expects {}", loaded.len(), expect.len())));
    }
    for (((lname, lt), (ename, et)), d) in loaded.into_iter().zip(expect).zip(dst) {
        if lname != ename {
            return Err(bad(format!("parameter order mismatch: checkpoint '{lname}', model '{ename}'")));
        }
        if lt.shape != et.shape {
            return Err(bad(format!("parameter '{lname}' shape {:?}, model wants {:?}", lt.shape, et.shape)));
        }
        *d = lt;
    }
    Ok(())
}
