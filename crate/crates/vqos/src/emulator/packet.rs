//! Packetization and the packet-loss process.

use super::codec::BlockIndex;
use crate::error::{Result, VqosError};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One transport unit of an encoded frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub seq: u32,
    pub frame_id: u64,
    pub payload: Vec<u8>,
    /// Half-open range of block indices this packet touches (empty when the
    /// packet carries only header bytes).
    pub block_range: (u32, u32),
}

/// Split an encoded stream into MTU-sized packets. Concatenating payloads
/// in seq order reproduces the stream exactly. An empty stream yields a
/// single empty-marker packet.
pub fn packetize(encoded: &[u8], mtu: usize, frame_id: u64, index: Option<&BlockIndex>) -> Result<Vec<Packet>> {
    if mtu == 0 {
        return Err(VqosError::InvalidArgument("packetize: mtu must be positive".into()));
    }
    if encoded.is_empty() {
        return Ok(vec![Packet { seq: 0, frame_id, payload: Vec::new(), block_range: (0, 0) }]);
    }
    let mut packets = Vec::with_capacity(encoded.len().div_ceil(mtu));
    for (seq, chunk) in encoded.chunks(mtu).enumerate() {
        let start = seq * mtu;
        let end = start + chunk.len();
        let block_range = index
            .map(|idx| blocks_overlapping(idx, start, end))
            .unwrap_or((0, 0));
        packets.push(Packet { seq: seq as u32, frame_id, payload: chunk.to_vec(), block_range });
    }
    Ok(packets)
}

fn blocks_overlapping(index: &BlockIndex, start: usize, end: usize) -> (u32, u32) {
    let mut lo = None;
    let mut hi = 0;
    for (bi, &(off, len)) in index.blocks.iter().enumerate() {
        let (bs, be) = (off as usize, (off + len) as usize);
        if bs < end && be > start {
            lo.get_or_insert(bi as u32);
            hi = bi as u32 + 1;
        }
    }
    (lo.unwrap_or(0), if lo.is_some() { hi } else { 0 })
}

/// Split an encoded stream into one packet per block record (the stream
/// header rides with the first record; a record longer than the MTU is
/// split across dedicated packets). One record per packet makes block
/// losses independent draws with probability equal to the per-packet drop
/// probability, regardless of how long the records are — so the loss
/// classes degrade both rate classes evenly, and the per-frame loss
/// evidence has the same effective sample size for every rate class.
pub fn packetize_blocks(
    encoded: &[u8],
    index: &BlockIndex,
    mtu: usize,
    frame_id: u64,
) -> Result<Vec<Packet>> {
    if mtu == 0 {
        return Err(VqosError::InvalidArgument("packetize: mtu must be positive".into()));
    }
    let mut packets: Vec<Packet> = Vec::new();
    let mut seq = 0u32;
    let mut push = |payload: Vec<u8>, block_range: (u32, u32), seq: &mut u32| {
        packets.push(Packet { seq: *seq, frame_id, payload, block_range });
        *seq += 1;
    };
    // header bytes ride ahead of the first block record
    let first_block = index.blocks.first().map(|&(o, _)| o as usize).unwrap_or(encoded.len());
    let mut header: Vec<u8> = encoded[..first_block].to_vec();
    for (bi, &(off, len)) in index.blocks.iter().enumerate() {
        let rec = &encoded[off as usize..(off + len) as usize];
        let range = (bi as u32, bi as u32 + 1);
        if rec.len() > mtu {
            // oversize record: flush pending header bytes, then split the
            // record across dedicated packets
            if !header.is_empty() {
                push(std::mem::take(&mut header), (0, 0), &mut seq);
            }
            for chunk in rec.chunks(mtu) {
                push(chunk.to_vec(), range, &mut seq);
            }
        } else {
            let mut payload = std::mem::take(&mut header);
            payload.extend_from_slice(rec);
            push(payload, range, &mut seq);
        }
    }
    if !header.is_empty() {
        push(header, (0, 0), &mut seq);
    }
    Ok(packets)
}

/// Concatenate payloads in seq order. Only meaningful for a complete set.
pub fn reassemble(packets: &[Packet]) -> Vec<u8> {
    let mut sorted: Vec<&Packet> = packets.iter().collect();
    sorted.sort_by_key(|p| p.seq);
    sorted.iter().flat_map(|p| p.payload.iter().copied()).collect()
}

/// Packet-loss process.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum LossModel {
    /// Independent drops with probability `p` per packet.
    Bernoulli { p: f64 },
    /// Two-state Markov chain for bursty loss; packets in the bad state are
    /// dropped with probability `loss_in_bad`.
    GilbertElliott { p_good_bad: f64, p_bad_good: f64, loss_in_bad: f64 },
}

impl LossModel {
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(VqosError::InvalidArgument(format!("loss probability {p} outside [0,1]")));
        }
        Ok(LossModel::Bernoulli { p })
    }

    pub fn gilbert_elliott(p_good_bad: f64, p_bad_good: f64, loss_in_bad: f64) -> Result<Self> {
        for v in [p_good_bad, p_bad_good, loss_in_bad] {
            if !(0.0..=1.0).contains(&v) {
                return Err(VqosError::InvalidArgument(format!("probability {v} outside [0,1]")));
            }
        }
        Ok(LossModel::GilbertElliott { p_good_bad, p_bad_good, loss_in_bad })
    }

    /// Long-run fraction of dropped packets.
    pub fn stationary_loss_rate(&self) -> f64 {
        match *self {
            LossModel::Bernoulli { p } => p,
            LossModel::GilbertElliott { p_good_bad, p_bad_good, loss_in_bad } => {
                if p_good_bad + p_bad_good == 0.0 {
                    0.0
                } else {
                    p_good_bad / (p_good_bad + p_bad_good) * loss_in_bad
                }
            }
        }
    }
}

/// Drop packets per the loss process. Survivors keep order and seq numbers;
/// the whole draw is a pure function of the seed.
pub fn apply_loss(packets: Vec<Packet>, model: &LossModel, seed: u64) -> Vec<Packet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *model {
        LossModel::Bernoulli { p } => packets
            .into_iter()
            .filter(|_| !(rng.gen::<f64>() < p))
            .collect(),
        LossModel::GilbertElliott { p_good_bad, p_bad_good, loss_in_bad } => {
            let mut bad = false;
            packets
                .into_iter()
                .filter(|_| {
                    bad = if bad { !(rng.gen::<f64>() < p_bad_good) } else { rng.gen::<f64>() < p_good_bad };
                    !(bad && rng.gen::<f64>() < loss_in_bad)
                })
                .collect()
        }
    }
}
