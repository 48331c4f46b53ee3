//! Corpus building, the manifest format, and batch loading.
//!
//! Layout on disk:
//!   <root>/originals/f00012.pgm
//!   <root>/degraded/r1600_l0.25/f00012.pgm
//!   <root>/manifest.jsonl          (written last; absent => corpus invalid)
//!
//! The manifest is JSON-lines: one header object, then one record per
//! degraded frame. Paths are relative to the corpus root so a rebuild into
//! any directory is byte-identical.

use super::frame::Frame;
use super::video::{gen_video, Motif};
use crate::emulator::{degrade, ClassSets, NetworkState, RateConfig};
use crate::error::{Result, VqosError};
use crate::seed::{derive_seed, rng_for};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

pub const MANIFEST_NAME: &str = "manifest.jsonl";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub motif: Motif,
    pub seed: u64,
    pub train_fraction: f64,
    pub classes: ClassSets,
    pub emulator: RateConfig,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            frames: 200,
            width: 64,
            height: 64,
            motif: Motif::GradientNoise,
            seed: 7,
            train_fraction: 0.8,
            classes: ClassSets::default(),
            emulator: RateConfig::default(),
        }
    }
}

impl CorpusConfig {
    pub fn validate(&self) -> Result<()> {
        self.classes.validate()?;
        self.emulator.validate()?;
        if self.frames == 0 {
            return Err(VqosError::InvalidArgument("corpus needs at least one frame".into()));
        }
        if !(0.0..1.0).contains(&self.train_fraction) || self.train_fraction == 0.0 {
            return Err(VqosError::InvalidArgument("train_fraction must be in (0,1)".into()));
        }
        Ok(())
    }

    /// Stable hash binding checkpoints and reports to the emulator setup.
    pub fn config_hash(&self) -> u32 {
        let json = serde_json::to_string(self).expect("config serializes");
        crc32fast::hash(json.as_bytes())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl std::str::FromStr for Split {
    type Err = VqosError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(VqosError::InvalidArgument(format!("unknown split '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub version: u32,
    pub config: CorpusConfig,
    pub config_hash: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub degraded: String,
    pub original: String,
    pub rate: u32,
    pub loss: f64,
    pub split: Split,
    pub seed: u64,
    pub frame_id: u64,
}

impl ManifestRecord {
    pub fn state(&self) -> NetworkState {
        NetworkState::new(self.rate, self.loss)
    }
}

#[derive(Debug, Clone)]
pub struct CorpusManifest {
    pub header: ManifestHeader,
    pub records: Vec<ManifestRecord>,
    pub root: PathBuf,
}

fn original_rel(frame_id: u64) -> String {
    format!("originals/f{frame_id:05}.pgm")
}

fn degraded_rel(state: &NetworkState, frame_id: u64) -> String {
    format!("degraded/r{}_l{}/f{frame_id:05}.pgm", state.rate_kbps, state.loss_class)
}

/// Generate the source video, run every frame through every (rate, loss)
/// condition, persist everything, and write the manifest last.
pub fn build_corpus(cfg: &CorpusConfig, out_dir: &Path) -> Result<CorpusManifest> {
    cfg.validate()?;
    let frames = gen_video(cfg.seed, cfg.frames, cfg.width, cfg.height, cfg.motif)?;

    for (id, frame) in frames.iter().enumerate() {
        frame.write_pgm(&out_dir.join(original_rel(id as u64)))?;
    }

    // conditions run in parallel; frames within a condition run in order so
    // each degraded frame can conceal from its predecessor
    let conditions = cfg.classes.conditions();
    let per_condition: Vec<Result<Vec<ManifestRecord>>> = conditions
        .par_iter()
        .enumerate()
        .map(|(ci, state)| {
            let mut records = Vec::with_capacity(frames.len());
            let mut reference: Option<Frame> = None;
            for (id, frame) in frames.iter().enumerate() {
                let seed = derive_seed(cfg.seed, id as u64, ci as u64, 1);
                let degraded = degrade(frame, state, &cfg.emulator, seed, reference.as_ref())?;
                let rel = degraded_rel(state, id as u64);
                degraded.write_pgm(&out_dir.join(&rel))?;
                records.push(ManifestRecord {
                    degraded: rel,
                    original: original_rel(id as u64),
                    rate: state.rate_kbps,
                    loss: state.loss_class,
                    split: Split::Train, // assigned below
                    seed,
                    frame_id: id as u64,
                });
                reference = Some(degraded);
            }
            Ok(records)
        })
        .collect();

    // stratified split by frame id: a frame's six conditions stay together
    let mut ids: Vec<u64> = (0..cfg.frames as u64).collect();
    ids.shuffle(&mut rng_for(cfg.seed, 0x73_70_6c_69_74, 0, 0));
    let n_train = ((cfg.frames as f64) * cfg.train_fraction).round() as usize;
    let train_ids: std::collections::HashSet<u64> = ids.into_iter().take(n_train).collect();

    let mut records = Vec::with_capacity(cfg.frames * conditions.len());
    for cond_records in per_condition {
        let mut cond_records = cond_records?;
        for r in &mut cond_records {
            r.split = if train_ids.contains(&r.frame_id) { Split::Train } else { Split::Test };
        }
        records.extend(cond_records);
    }

    let header = ManifestHeader { version: MANIFEST_VERSION, config: cfg.clone(), config_hash: cfg.config_hash() };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for r in &records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    let path = out_dir.join(MANIFEST_NAME);
    fs::write(&path, out).map_err(|e| VqosError::io(path.display().to_string(), e))?;

    Ok(CorpusManifest { header, records, root: out_dir.to_path_buf() })
}

impl CorpusManifest {
    pub fn load(root: &Path) -> Result<Self> {
        let path = root.join(MANIFEST_NAME);
        let text = fs::read_to_string(&path).map_err(|e| VqosError::io(path.display().to_string(), e))?;
        let mut lines = text.lines();
        let header_line = lines
            .next()
            .ok_or_else(|| VqosError::Corpus("manifest is empty".into()))?;
        let header: ManifestHeader = serde_json::from_str(header_line)
            .map_err(|e| VqosError::Corpus(format!("bad manifest header: {e}")))?;
        if header.version != MANIFEST_VERSION {
            return Err(VqosError::Corpus(format!("unsupported manifest version {}", header.version)));
        }
        let mut records = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: ManifestRecord = serde_json::from_str(line)
                .map_err(|e| VqosError::Corpus(format!("bad manifest record {}: {e}", i + 2)))?;
            records.push(rec);
        }
        Ok(CorpusManifest { header, records, root: root.to_path_buf() })
    }

    pub fn split_records(&self, split: Split) -> Vec<&ManifestRecord> {
        self.records.iter().filter(|r| r.split == split).collect()
    }

    /// One-pass manifest <-> disk consistency check.
    pub fn verify(&self) -> Result<()> {
        let mut train_ids = std::collections::HashSet::new();
        let mut test_ids = std::collections::HashSet::new();
        let mut per_condition: std::collections::BTreeMap<(u32, String), (usize, usize)> = Default::default();
        for r in &self.records {
            for rel in [&r.degraded, &r.original] {
                let p = self.root.join(rel);
                if !p.is_file() {
                    return Err(VqosError::Corpus(format!("missing corpus file {}", p.display())));
                }
            }
            let key = (r.rate, format!("{}", r.loss));
            let counts = per_condition.entry(key).or_default();
            match r.split {
                Split::Train => {
                    train_ids.insert(r.frame_id);
                    counts.0 += 1;
                }
                Split::Test => {
                    test_ids.insert(r.frame_id);
                    counts.1 += 1;
                }
            }
        }
        if train_ids.intersection(&test_ids).next().is_some() {
            return Err(VqosError::Corpus("a frame id appears in both splits".into()));
        }
        for ((rate, loss), (n_train, n_test)) in &per_condition {
            if *n_train == 0 || *n_test == 0 {
                return Err(VqosError::Corpus(format!(
                    "condition ({rate}, {loss}) missing from a split: train {n_train}, test {n_test}"
                )));
            }
        }
        Ok(())
    }
}

/// One labeled sample held in memory.
#[derive(Debug, Clone)]
pub struct Sample {
    pub recv: Frame,
    pub org: Frame,
    pub state: NetworkState,
}

/// A split loaded into memory for epoch iteration.
#[derive(Debug, Clone)]
pub struct CorpusData {
    pub samples: Vec<Sample>,
    pub classes: ClassSets,
}

/// One shuffled mini-batch (references into `CorpusData`).
pub struct Batch<'a> {
    pub recv: Vec<&'a Frame>,
    pub org: Vec<&'a Frame>,
    pub states: Vec<NetworkState>,
}

impl CorpusData {
    pub fn load(manifest: &CorpusManifest, split: Split) -> Result<Self> {
        let mut samples = Vec::new();
        for r in manifest.split_records(split) {
            let recv = Frame::read_pgm(&manifest.root.join(&r.degraded))?;
            let org = Frame::read_pgm(&manifest.root.join(&r.original))?;
            samples.push(Sample { recv, org, state: r.state() });
        }
        if samples.is_empty() {
            return Err(VqosError::Corpus("split contains no records".into()));
        }
        Ok(CorpusData { samples, classes: manifest.header.config.classes.clone() })
    }

    /// Shuffle per epoch seed and chunk; every sample appears exactly once.
    pub fn batches(&self, batch_size: usize, epoch_seed: u64) -> Vec<Batch<'_>> {
        let mut order: Vec<usize> = (0..self.samples.len()).collect();
        order.shuffle(&mut rng_for(epoch_seed, 0x62_61_74, 0, 0));
        order
            .chunks(batch_size.max(1))
            .map(|chunk| Batch {
                recv: chunk.iter().map(|&i| &self.samples[i].recv).collect(),
                org: chunk.iter().map(|&i| &self.samples[i].org).collect(),
                states: chunk.iter().map(|&i| self.samples[i].state).collect(),
            })
            .collect()
    }
}

/// Load one epoch of shuffled batches for a split.
pub fn load_batch(
    manifest: &CorpusManifest,
    split: Split,
    batch_size: usize,
    epoch_seed: u64,
) -> Result<Vec<(Vec<Sample>, Vec<NetworkState>)>> {
    let data = CorpusData::load(manifest, split)?;
    Ok(data
        .batches(batch_size, epoch_seed)
        .into_iter()
        .map(|b| {
            let states = b.states.clone();
            let samples = b
                .recv
                .iter()
                .zip(b.org.iter())
                .zip(b.states.iter())
                .map(|((r, o), s)| Sample { recv: (*r).clone(), org: (*o).clone(), state: *s })
                .collect();
            (samples, states)
        })
        .collect())
}
