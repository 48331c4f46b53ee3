//! Deterministic network emulator: encode a frame at a target data-rate
//! class, packetize, drop packets, decode with concealment.
//!
//! The emulator claims qualitative equivalence with a lab emulator only:
//! distortion grows monotonically as the rate class drops or the loss
//! class rises, and the (rate, loss) conditions are statistically
//! separable. It is not a real codec or transport.

mod codec;
mod packet;

pub use codec::{decode_conceal, parse_index, throttle_encode, BlockIndex, HEADER_LEN};
pub use packet::{apply_loss, packetize, reassemble, LossModel, Packet};

use crate::corpus::Frame;
use crate::error::{Result, VqosError};
use serde::{Deserialize, Serialize};

/// The pair of class labels the discriminator must recover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    /// Data-rate class in kbps, e.g. 1200 or 1600.
    pub rate_kbps: u32,
    /// Packet-loss class as published by the corpus (e.g. 0.05). The
    /// emulator maps it to a drop probability via `RateConfig::loss_multiplier`.
    pub loss_class: f64,
}

impl NetworkState {
    pub fn new(rate_kbps: u32, loss_class: f64) -> Self {
        NetworkState { rate_kbps, loss_class }
    }
}

/// Configured label taxonomy, ascending. One-hot indices follow the sorted
/// order, so checkpoints trained under one config stay self-describing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSets {
    pub rates: Vec<u32>,
    pub losses: Vec<f64>,
}

impl Default for ClassSets {
    fn default() -> Self {
        ClassSets { rates: vec![1200, 1600], losses: vec![0.05, 0.10, 0.25] }
    }
}

impl ClassSets {
    pub fn rate_index(&self, rate: u32) -> Result<usize> {
        self.rates
            .iter()
            .position(|&r| r == rate)
            .ok_or_else(|| VqosError::InvalidArgument(format!("unknown rate class {rate}")))
    }

    pub fn loss_index(&self, loss: f64) -> Result<usize> {
        self.losses
            .iter()
            .position(|&l| l == loss)
            .ok_or_else(|| VqosError::InvalidArgument(format!("unknown loss class {loss}")))
    }

    pub fn indices(&self, state: &NetworkState) -> Result<(usize, usize)> {
        Ok((self.rate_index(state.rate_kbps)?, self.loss_index(state.loss_class)?))
    }

    pub fn state_of(&self, rate_idx: usize, loss_idx: usize) -> NetworkState {
        NetworkState::new(self.rates[rate_idx], self.losses[loss_idx])
    }

    /// All (rate, loss) conditions in sorted order.
    pub fn conditions(&self) -> Vec<NetworkState> {
        let mut out = Vec::new();
        for &r in &self.rates {
            for &l in &self.losses {
                out.push(NetworkState::new(r, l));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.rates.is_empty() || self.losses.is_empty() {
            return Err(VqosError::InvalidArgument("class sets must be non-empty".into()));
        }
        if !self.rates.windows(2).all(|w| w[0] < w[1]) {
            return Err(VqosError::InvalidArgument("rate classes must be strictly ascending".into()));
        }
        if !self.losses.windows(2).all(|w| w[0] < w[1]) {
            return Err(VqosError::InvalidArgument("loss classes must be strictly ascending".into()));
        }
        if self.losses.iter().any(|&l| l < 0.0) {
            return Err(VqosError::InvalidArgument("loss classes must be non-negative".into()));
        }
        Ok(())
    }
}

/// Emulator tuning: quantization step per rate class, packet geometry, and
/// the loss-class-to-probability mapping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateConfig {
    /// (rate class, quantization step), ascending by rate. Lower rate must
    /// map to a strictly larger (coarser) step.
    pub rate_q: Vec<(u32, u16)>,
    /// Quantizer block edge in pixels. Blocks are also the loss-concealment
    /// unit, so smaller blocks mean more independent loss draws per frame
    /// and better statistical separability of the loss classes.
    pub block: usize,
    /// Packet payload size in bytes.
    pub mtu: usize,
    /// Per-packet drop probability = loss class value * this multiplier.
    /// The default of 3.0 (0.05 -> 15% of packets) keeps the desk-scale
    /// conditions statistically separable from a single 64x64 frame: the
    /// loss evidence in one frame is a binomial stale-block count, and
    /// wider-spaced drop rates push the overlap between adjacent classes
    /// well below 1%. Set 1.0 to read the class value as the probability.
    pub loss_multiplier: f64,
    /// When set, losses are drawn from a bursty Gilbert-Elliott chain with
    /// this mean burst length instead of independent Bernoulli drops.
    pub burst_len: Option<f64>,
}

impl Default for RateConfig {
    fn default() -> Self {
        RateConfig {
            rate_q: vec![(1200, 32), (1600, 4)],
            block: 4,
            mtu: 192,
            loss_multiplier: 3.0,
            burst_len: None,
        }
    }
}

impl RateConfig {
    pub fn q_for(&self, rate_kbps: u32) -> Result<u16> {
        self.rate_q
            .iter()
            .find(|&&(r, _)| r == rate_kbps)
            .map(|&(_, q)| q)
            .ok_or_else(|| VqosError::InvalidArgument(format!("no quantization step for rate class {rate_kbps}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.rate_q.is_empty() {
            return Err(VqosError::InvalidArgument("rate_q must be non-empty".into()));
        }
        if !self.rate_q.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 > w[1].1) {
            return Err(VqosError::InvalidArgument(
                "rate_q must be ascending in rate and strictly descending in q".into(),
            ));
        }
        if self.rate_q.iter().any(|&(_, q)| q == 0) {
            return Err(VqosError::InvalidArgument("quantization steps must be positive".into()));
        }
        if self.block == 0 || self.mtu == 0 {
            return Err(VqosError::InvalidArgument("block and mtu must be positive".into()));
        }
        if self.loss_multiplier < 0.0 {
            return Err(VqosError::InvalidArgument("loss_multiplier must be non-negative".into()));
        }
        Ok(())
    }

    /// Loss process for a loss class under this config.
    pub fn loss_model(&self, loss_class: f64) -> Result<LossModel> {
        let p = (loss_class * self.loss_multiplier).clamp(0.0, 1.0);
        match self.burst_len {
            None => LossModel::bernoulli(p),
            Some(burst) => {
                // mean burst length fixes p_bad_good; p_good_bad then sets the
                // stationary rate; drops are certain inside a burst
                if burst < 1.0 {
                    return Err(VqosError::InvalidArgument("burst_len must be >= 1".into()));
                }
                let p_bad_good = 1.0 / burst;
                if p >= 1.0 {
                    return LossModel::gilbert_elliott(1.0, 0.0, 1.0);
                }
                let p_good_bad = (p * p_bad_good / (1.0 - p)).min(1.0);
                LossModel::gilbert_elliott(p_good_bad, p_bad_good, 1.0)
            }
        }
    }
}

/// Run one frame through encode -> packetize -> loss -> conceal.
/// Deterministic given (frame, state, seed).
pub fn degrade(
    frame: &Frame,
    state: &NetworkState,
    cfg: &RateConfig,
    seed: u64,
    reference: Option<&Frame>,
) -> Result<Frame> {
    let q = cfg.q_for(state.rate_kbps)?;
    let (encoded, index) = throttle_encode(frame, q, cfg.block)?;
    let packets = packet::packetize_blocks(&encoded, &index, cfg.mtu, seed)?;
    let model = cfg.loss_model(state.loss_class)?;
    let needed = carrier_counts(&index, &packets);
    let survivors = apply_loss(packets, &model, seed);
    let have = carrier_counts(&index, &survivors);
    let present: Vec<bool> = needed.iter().zip(have.iter()).map(|(n, h)| h == n).collect();
    decode_conceal(&encoded, &index, &present, reference)
}

/// How many packets carry part of each block. A block is decodable only if
/// every one of its carriers survived.
fn carrier_counts(index: &BlockIndex, packets: &[Packet]) -> Vec<u32> {
    let mut counts = vec![0u32; index.blocks.len()];
    for p in packets {
        for bi in p.block_range.0..p.block_range.1 {
            counts[bi as usize] += 1;
        }
    }
    counts
}
