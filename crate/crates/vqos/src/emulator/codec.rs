//! Block quantizer with run-length coding.
//!
//! Not a real video codec: a uniform per-block pixel quantizer whose step
//! grows as the data-rate class drops, plus RLE so that coarser
//! quantization also shortens the stream. Integer arithmetic end to end,
//! so encode/decode are bit-identical across platforms.
//!
//! Stream layout (little-endian):
//!   magic "VQEB", version u8, width u16, height u16, channels u8,
//!   block u8, q u16, block-count u32,
//!   then per block: n_pairs u16, n_pairs x (run u8, level u8).

use crate::corpus::Frame;
use crate::error::{Result, VqosError};

pub const MAGIC: &[u8; 4] = b"VQEB";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 4 + 1 + 2 + 2 + 1 + 1 + 2 + 4;

/// Byte layout of one encoded frame: where each block's record lives.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockIndex {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub block: usize,
    pub q: u16,
    /// (offset, length) into the encoded stream, per block in raster order.
    pub blocks: Vec<(u32, u32)>,
}

impl BlockIndex {
    pub fn blocks_x(&self) -> usize {
        self.width.div_ceil(self.block)
    }

    pub fn blocks_y(&self) -> usize {
        self.height.div_ceil(self.block)
    }

    pub fn total_len(&self) -> usize {
        self.blocks
            .last()
            .map(|&(o, l)| (o + l) as usize)
            .unwrap_or(HEADER_LEN)
    }
}

fn quantize(v: u8, q: u16) -> u8 {
    let level = (v as u32 + q as u32 / 2) / q as u32;
    level.min(255) as u8
}

fn dequantize(level: u8, q: u16) -> u8 {
    (level as u32 * q as u32).min(255) as u8
}

/// Extract one block's quantization levels in raster order, edge-padding
/// past the frame border.
fn block_levels(data: &[u8], w: usize, h: usize, plane: usize, bx: usize, by: usize, block: usize, q: u16) -> Vec<u8> {
    let mut out = Vec::with_capacity(block * block);
    for dy in 0..block {
        let y = (by * block + dy).min(h - 1);
        for dx in 0..block {
            let x = (bx * block + dx).min(w - 1);
            out.push(quantize(data[plane * w * h + y * w + x], q));
        }
    }
    out
}

/// Encode a frame at the given quantization step.
pub fn throttle_encode(frame: &Frame, q: u16, block: usize) -> Result<(Vec<u8>, BlockIndex)> {
    if q == 0 || block == 0 {
        return Err(VqosError::InvalidArgument("encode: q and block must be positive".into()));
    }
    if frame.width == 0 || frame.height == 0 {
        return Err(VqosError::InvalidArgument("encode: empty frame".into()));
    }
    let data = frame.to_u8();
    let (w, h, c) = (frame.width, frame.height, frame.channels);
    let bx_n = w.div_ceil(block);
    let by_n = h.div_ceil(block);
    let block_count = bx_n * by_n * c;

    let mut out = Vec::with_capacity(HEADER_LEN + block_count * 8);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(w as u16).to_le_bytes());
    out.extend_from_slice(&(h as u16).to_le_bytes());
    out.push(c as u8);
    out.push(block as u8);
    out.extend_from_slice(&q.to_le_bytes());
    out.extend_from_slice(&(block_count as u32).to_le_bytes());

    let mut blocks = Vec::with_capacity(block_count);
    for plane in 0..c {
        for by in 0..by_n {
            for bx in 0..bx_n {
                let offset = out.len() as u32;
                let levels = block_levels(&data, w, h, plane, bx, by, block, q);
                let pairs = rle_encode(&levels);
                out.extend_from_slice(&(pairs.len() as u16).to_le_bytes());
                for &(run, level) in &pairs {
                    out.push(run);
                    out.push(level);
                }
                blocks.push((offset, (out.len() as u32) - offset));
            }
        }
    }
    let index = BlockIndex { width: w, height: h, channels: c, block, q, blocks };
    Ok((out, index))
}

fn rle_encode(levels: &[u8]) -> Vec<(u8, u8)> {
    let mut pairs = Vec::new();
    let mut iter = levels.iter();
    let mut cur = *iter.next().expect("block is non-empty");
    let mut run: u32 = 1;
    for &v in iter {
        if v == cur && run < 255 {
            run += 1;
        } else {
            pairs.push((run as u8, cur));
            cur = v;
            run = 1;
        }
    }
    pairs.push((run as u8, cur));
    pairs
}

/// Parse the header of an encoded stream back into an index skeleton,
/// walking the per-block records to recover offsets.
pub fn parse_index(encoded: &[u8]) -> Result<BlockIndex> {
    let err = |m: &str| VqosError::Codec(format!("invalid stream: {m}"));
    if encoded.len() < HEADER_LEN || &encoded[..4] != MAGIC {
        return Err(err("bad magic or truncated header"));
    }
    if encoded[4] != VERSION {
        return Err(err("unsupported version"));
    }
    let width = u16::from_le_bytes([encoded[5], encoded[6]]) as usize;
    let height = u16::from_le_bytes([encoded[7], encoded[8]]) as usize;
    let channels = encoded[9] as usize;
    let block = encoded[10] as usize;
    let q = u16::from_le_bytes([encoded[11], encoded[12]]);
    let block_count = u32::from_le_bytes([encoded[13], encoded[14], encoded[15], encoded[16]]) as usize;
    if width == 0 || height == 0 || channels == 0 || block == 0 || q == 0 {
        return Err(err("zero-valued header field"));
    }
    let expect = width.div_ceil(block) * height.div_ceil(block) * channels;
    if block_count != expect {
        return Err(err("block count inconsistent with geometry"));
    }
    let mut blocks = Vec::with_capacity(block_count);
    let mut pos = HEADER_LEN;
    for _ in 0..block_count {
        if pos + 2 > encoded.len() {
            return Err(err("truncated block record"));
        }
        let n_pairs = u16::from_le_bytes([encoded[pos], encoded[pos + 1]]) as usize;
        let len = 2 + n_pairs * 2;
        if pos + len > encoded.len() {
            return Err(err("truncated block payload"));
        }
        blocks.push((pos as u32, len as u32));
        pos += len;
    }
    Ok(BlockIndex { width, height, channels, block, q, blocks })
}

/// Decode with loss concealment. `present` flags which blocks arrived
/// intact; missing blocks are copied from the reference frame, or mid-gray
/// when there is none.
pub fn decode_conceal(
    encoded: &[u8],
    index: &BlockIndex,
    present: &[bool],
    reference: Option<&Frame>,
) -> Result<Frame> {
    let err = |m: &str| VqosError::Codec(format!("decode: {m}"));
    if present.len() != index.blocks.len() {
        return Err(err("presence map does not match block index"));
    }
    if let Some(r) = reference {
        if r.width != index.width || r.height != index.height || r.channels != index.channels {
            return Err(err("reference frame geometry mismatch"));
        }
    }
    let (w, h, c, block) = (index.width, index.height, index.channels, index.block);
    let bx_n = index.blocks_x();
    let ref_u8: Option<Vec<u8>> = reference.map(|r| r.to_u8());
    let mut out = vec![128u8; w * h * c];
    for (bi, &(offset, len)) in index.blocks.iter().enumerate() {
        let plane = bi / (bx_n * index.blocks_y());
        let within = bi % (bx_n * index.blocks_y());
        let by = within / bx_n;
        let bx = within % bx_n;
        if present[bi] {
            let rec = encoded
                .get(offset as usize..(offset + len) as usize)
                .ok_or_else(|| err("block record out of range"))?;
            let n_pairs = u16::from_le_bytes([rec[0], rec[1]]) as usize;
            if rec.len() != 2 + n_pairs * 2 {
                return Err(err("corrupt block record"));
            }
            let mut levels = Vec::with_capacity(block * block);
            for p in 0..n_pairs {
                let run = rec[2 + p * 2] as usize;
                let level = rec[3 + p * 2];
                levels.extend(std::iter::repeat(level).take(run));
            }
            if levels.len() != block * block {
                return Err(err("block run lengths do not cover the block"));
            }
            for dy in 0..block {
                let y = by * block + dy;
                if y >= h {
                    break;
                }
                for dx in 0..block {
                    let x = bx * block + dx;
                    if x >= w {
                        break;
                    }
                    out[plane * w * h + y * w + x] = dequantize(levels[dy * block + dx], index.q);
                }
            }
        } else if let Some(r) = &ref_u8 {
            for dy in 0..block {
                let y = by * block + dy;
                if y >= h {
                    break;
                }
                for dx in 0..block {
                    let x = bx * block + dx;
                    if x >= w {
                        break;
                    }
                    out[plane * w * h + y * w + x] = r[plane * w * h + y * w + x];
                }
            }
        }
        // no reference: stays mid-gray 128
    }
    Frame::from_u8(w, h, c, &out)
}
