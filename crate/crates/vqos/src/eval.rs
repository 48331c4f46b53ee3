//! Evaluation artifacts: confusion matrices, the model comparison table,
//! and reconstruction quality metrics.

use crate::corpus::{psnr, CorpusData, CorpusManifest, Frame, Split};
use crate::emulator::{ClassSets, NetworkState};
use crate::error::{Result, VqosError};
use crate::model::{baseline_predict, predict, reconstruct, BaselineModel, GanModel};
use serde::Serialize;
use std::fmt::Display;
use std::fs;
use std::path::Path;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Integer confusion counts, rows = true class, columns = predicted class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>) -> Self {
        let n = labels.len();
        ConfusionMatrix { labels, counts: vec![vec![0; n]; n] }
    }

    pub fn record(&mut self, truth: usize, pred: usize) {
        self.counts[truth][pred] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let diag: u64 = (0..self.labels.len()).map(|i| self.counts[i][i]).sum();
        diag as f64 / total as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\pred");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (i, row) in self.counts.iter().enumerate() {
            out.push_str(&self.labels[i]);
            for c in row {
                out.push_str(&format!(",{c}"));
            }
            out.push('\n');
        }
        out
    }

    /// Aligned text table for human eyes.
    pub fn render_table(&self, title: &str) -> String {
        let w = self
            .labels
            .iter()
            .map(|l| l.len())
            .chain(self.counts.iter().flatten().map(|c| c.to_string().len()))
            .max()
            .unwrap_or(1)
            .max(4);
        let mut out = format!("{title} (rows = true, cols = predicted)\n");
        out.push_str(&format!("{:>w$} ", ""));
        for l in &self.labels {
            out.push_str(&format!("{l:>w$} "));
        }
        out.push('\n');
        for (i, row) in self.counts.iter().enumerate() {
            out.push_str(&format!("{:>w$} ", self.labels[i]));
            for c in row {
                out.push_str(&format!("{c:>w$} "));
            }
            out.push('\n');
        }
        out
    }
}

/// Tally a confusion matrix from parallel predicted/true value sequences.
/// Values must come from `classes`; anything else is rejected.
pub fn confusion<T: PartialEq + Display>(pred: &[T], truth: &[T], classes: &[T]) -> Result<ConfusionMatrix> {
    if pred.len() != truth.len() {
        return Err(VqosError::InvalidArgument(format!(
            "confusion: {} predictions vs {} labels",
            pred.len(),
            truth.len()
        )));
    }
    let index = |v: &T| -> Result<usize> {
        classes
            .iter()
            .position(|c| c == v)
            .ok_or_else(|| VqosError::InvalidArgument(format!("confusion: value {v} not in class set")))
    };
    let mut m = ConfusionMatrix::new(classes.iter().map(|c| c.to_string()).collect());
    for (p, t) in pred.iter().zip(truth) {
        m.record(index(t)?, index(p)?);
    }
    Ok(m)
}

/// One model's classification results on a split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelEval {
    pub model_kind: String,
    pub rate_acc: f64,
    pub loss_acc: f64,
    pub joint_acc: f64,
    pub confusion_rate: ConfusionMatrix,
    pub confusion_loss: ConfusionMatrix,
    pub confusion_joint: ConfusionMatrix,
}

impl ModelEval {
    /// joint accuracy can never beat either marginal
    pub fn check_invariants(&self) -> Result<()> {
        if self.joint_acc > self.rate_acc.min(self.loss_acc) + 1e-12 {
            return Err(VqosError::InvalidArgument(format!(
                "joint accuracy {} exceeds min(rate {}, loss {})",
                self.joint_acc, self.rate_acc, self.loss_acc
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionPsnr {
    pub rate: u32,
    pub loss: f64,
    pub degraded_psnr: f64,
    pub reconstructed_psnr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub split: Split,
    pub n_samples: usize,
    pub classes: ClassSets,
    pub corpus_hash: u32,
    pub models: Vec<ModelEval>,
    pub per_condition: Vec<ConditionPsnr>,
    pub mean_degraded_psnr: f64,
    /// Two-stage flow: reconstruction conditioned on predicted labels.
    pub mean_reconstructed_psnr: Option<f64>,
    /// Probe: reconstruction with deliberately wrong labels.
    pub mean_wrong_label_psnr: Option<f64>,
}

pub const COMPARISON_HEADER: &str = "model,rate_acc,loss_acc,joint_acc";

impl EvalReport {
    pub fn comparison_csv(&self) -> String {
        let mut out = String::from(COMPARISON_HEADER);
        out.push('\n');
        for m in &self.models {
            out.push_str(&format!(
                "{},{:.6},{:.6},{:.6}\n",
                m.model_kind, m.rate_acc, m.loss_acc, m.joint_acc
            ));
        }
        out
    }
}

fn joint_label(st: &NetworkState) -> String {
    format!("{}kbps/{}", st.rate_kbps, st.loss_class)
}

fn eval_classifier<F>(
    kind: &str,
    data: &CorpusData,
    classes: &ClassSets,
    mut predict_one: F,
) -> Result<ModelEval>
where
    F: FnMut(&Frame, &Frame) -> Result<NetworkState>,
{
    let mut pred_states = Vec::with_capacity(data.samples.len());
    let truth: Vec<NetworkState> = data.samples.iter().map(|s| s.state).collect();
    // streaming counters, cross-checked against the matrices below
    let (mut rate_ok, mut loss_ok, mut joint_ok) = (0usize, 0usize, 0usize);
    for s in &data.samples {
        let p = predict_one(&s.org, &s.recv)?;
        rate_ok += (p.rate_kbps == s.state.rate_kbps) as usize;
        loss_ok += (p.loss_class == s.state.loss_class) as usize;
        joint_ok += (p == s.state) as usize;
        pred_states.push(p);
    }
    let n = data.samples.len();
    let pred_rates: Vec<u32> = pred_states.iter().map(|s| s.rate_kbps).collect();
    let true_rates: Vec<u32> = truth.iter().map(|s| s.rate_kbps).collect();
    let pred_losses: Vec<f64> = pred_states.iter().map(|s| s.loss_class).collect();
    let true_losses: Vec<f64> = truth.iter().map(|s| s.loss_class).collect();
    let joint_classes: Vec<String> = classes.conditions().iter().map(joint_label).collect();
    let pred_joint: Vec<String> = pred_states.iter().map(joint_label).collect();
    let true_joint: Vec<String> = truth.iter().map(joint_label).collect();
    let eval = ModelEval {
        model_kind: kind.to_string(),
        rate_acc: rate_ok as f64 / n as f64,
        loss_acc: loss_ok as f64 / n as f64,
        joint_acc: joint_ok as f64 / n as f64,
        confusion_rate: confusion(&pred_rates, &true_rates, &classes.rates)?,
        confusion_loss: confusion(&pred_losses, &true_losses, &classes.losses)?,
        confusion_joint: confusion(&pred_joint, &true_joint, &joint_classes)?,
    };
    if (eval.confusion_rate.accuracy() - eval.rate_acc).abs() > 1e-12
        || (eval.confusion_loss.accuracy() - eval.loss_acc).abs() > 1e-12
        || (eval.confusion_joint.accuracy() - eval.joint_acc).abs() > 1e-12
    {
        return Err(VqosError::InvalidArgument(
            "confusion-matrix accuracy disagrees with streaming counters".into(),
        ));
    }
    eval.check_invariants()?;
    Ok(eval)
}

fn check_classes(kind: &str, model_classes: &ClassSets, corpus_classes: &ClassSets) -> Result<()> {
    if model_classes != corpus_classes {
        return Err(VqosError::InvalidArgument(format!(
            "{kind} checkpoint classes {model_classes:?} do not match corpus classes {corpus_classes:?}"
        )));
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| VqosError::io(path.display().to_string(), e))
}

/// Evaluate the given model(s) on a corpus split and persist report.json,
/// confusion CSVs, comparison.csv, and sample PGM triptychs under `out_dir`.
pub fn evaluate(
    gan: Option<&GanModel>,
    baseline: Option<&BaselineModel>,
    manifest: &CorpusManifest,
    split: Split,
    out_dir: &Path,
) -> Result<EvalReport> {
    if gan.is_none() && baseline.is_none() {
        return Err(VqosError::InvalidArgument("evaluate needs at least one model".into()));
    }
    let classes = &manifest.header.config.classes;
    let data = CorpusData::load(manifest, split)?;
    fs::create_dir_all(out_dir).map_err(|e| VqosError::io(out_dir.display().to_string(), e))?;

    let mut models = Vec::new();
    if let Some(model) = gan {
        check_classes("gan", &model.classes, classes)?;
        models.push(eval_classifier("vqos_gan", &data, classes, |_org, recv| {
            Ok(predict(model, recv)?.state)
        })?);
    }
    if let Some(model) = baseline {
        check_classes("baseline", &model.classes, classes)?;
        models.push(eval_classifier("baseline_cnn", &data, classes, |org, recv| {
            Ok(baseline_predict(model, org, recv)?.state)
        })?);
    }

    // reconstruction quality, per condition and overall
    let conditions = classes.conditions();
    let mut per_condition = Vec::with_capacity(conditions.len());
    let mut deg_sum = 0.0;
    let mut rec_sum = 0.0;
    let mut wrong_sum = 0.0;
    for cond in &conditions {
        let samples: Vec<_> = data.samples.iter().filter(|s| s.state == *cond).collect();
        let mut deg = 0.0;
        let mut rec = 0.0;
        for s in &samples {
            deg += psnr(&s.org, &s.recv)?;
            if let Some(model) = gan {
                let (frame, _) = reconstruct(model, &s.recv, None)?;
                rec += psnr(&s.org, &frame)?;
                let (ri, li) = classes.indices(cond)?;
                let wrong = classes.state_of((ri + 1) % classes.rates.len(), (li + 1) % classes.losses.len());
                let (wframe, _) = reconstruct(model, &s.recv, Some(wrong))?;
                wrong_sum += psnr(&s.org, &wframe)?;
            }
        }
        let n = samples.len().max(1) as f64;
        deg_sum += deg;
        rec_sum += rec;
        per_condition.push(ConditionPsnr {
            rate: cond.rate_kbps,
            loss: cond.loss_class,
            degraded_psnr: deg / n,
            reconstructed_psnr: gan.map(|_| rec / n),
        });
        // sample triptych: first frame of this condition
        if let Some(s) = samples.first() {
            let dir = out_dir.join("samples");
            let stem = format!("r{}_l{}", cond.rate_kbps, cond.loss_class);
            s.org.write_pgm(&dir.join(format!("{stem}_original.pgm")))?;
            s.recv.write_pgm(&dir.join(format!("{stem}_degraded.pgm")))?;
            if let Some(model) = gan {
                let (frame, _) = reconstruct(model, &s.recv, None)?;
                frame.write_pgm(&dir.join(format!("{stem}_reconstructed.pgm")))?;
            }
        }
    }
    let n = data.samples.len() as f64;
    let report = EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        split,
        n_samples: data.samples.len(),
        classes: classes.clone(),
        corpus_hash: manifest.header.config_hash,
        models,
        per_condition,
        mean_degraded_psnr: deg_sum / n,
        mean_reconstructed_psnr: gan.map(|_| rec_sum / n),
        mean_wrong_label_psnr: gan.map(|_| wrong_sum / n),
    };

    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_file(&out_dir.join("report.json"), &json)?;
    let primary = report.models.first().expect("at least one model");
    write_file(&out_dir.join("confusion_rate.csv"), &primary.confusion_rate.to_csv())?;
    write_file(&out_dir.join("confusion_loss.csv"), &primary.confusion_loss.to_csv())?;
    write_file(&out_dir.join("comparison.csv"), &report.comparison_csv())?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_corpus, CorpusConfig};
    use rand::Rng;

    #[test]
    fn all_correct_is_diagonal() {
        let vals = vec![0.05, 0.10, 0.25, 0.05];
        let m = confusion(&vals, &vals, &[0.05, 0.10, 0.25]).unwrap();
        assert_eq!(m.accuracy(), 1.0);
        assert_eq!(m.counts[0][0], 2);
        assert_eq!(m.counts[1][1], 1);
        assert_eq!(m.counts[2][2], 1);
        assert_eq!(m.total(), 4);
    }

    #[test]
    fn constant_prediction_fills_one_column() {
        let pred = vec![1200u32; 5];
        let truth = vec![1200, 1600, 1600, 1200, 1600];
        let m = confusion(&pred, &truth, &[1200, 1600]).unwrap();
        for row in &m.counts {
            assert_eq!(row[1], 0);
        }
        assert_eq!(m.counts[0][0] + m.counts[1][0], 5);
    }

    #[test]
    fn random_case_matches_hand_tally() {
        let classes = [10u32, 20, 30];
        let mut rng = crate::seed::rng_for(17, 0, 0, 0);
        let pred: Vec<u32> = (0..20).map(|_| classes[rng.gen_range(0..3)]).collect();
        let truth: Vec<u32> = (0..20).map(|_| classes[rng.gen_range(0..3)]).collect();
        let m = confusion(&pred, &truth, &classes).unwrap();
        // brute-force tally
        for (ti, &t) in classes.iter().enumerate() {
            for (pi, &p) in classes.iter().enumerate() {
                let expect = pred.iter().zip(&truth).filter(|&(&a, &b)| a == p && b == t).count() as u64;
                assert_eq!(m.counts[ti][pi], expect, "cell ({t}, {p})");
            }
        }
        assert_eq!(m.total(), 20);
    }

    #[test]
    fn unknown_values_and_length_mismatch_rejected() {
        assert!(confusion(&[1u32], &[7u32], &[1, 2]).is_err());
        assert!(confusion(&[1u32, 2], &[1u32], &[1, 2]).is_err());
    }

    #[test]
    fn evaluate_writes_artifacts_and_keeps_invariants() {
        let dir = tempfile::tempdir().unwrap();
        let corpus_cfg = CorpusConfig { frames: 8, width: 32, height: 32, ..Default::default() };
        let manifest = build_corpus(&corpus_cfg, &dir.path().join("corpus")).unwrap();
        let model = GanModel::new(32, 32, ClassSets::default(), 16, 3, manifest.header.config_hash).unwrap();
        let out = dir.path().join("report");
        let report = evaluate(Some(&model), None, &manifest, Split::Test, &out).unwrap();
        assert!(report.models[0].joint_acc <= report.models[0].rate_acc.min(report.models[0].loss_acc) + 1e-12);
        assert!(out.join("report.json").is_file());
        assert!(out.join("confusion_rate.csv").is_file());
        assert!(out.join("confusion_loss.csv").is_file());
        let comparison = fs::read_to_string(out.join("comparison.csv")).unwrap();
        assert!(comparison.starts_with(COMPARISON_HEADER));
        assert_eq!(comparison.trim().lines().count(), 2);
        assert!(out.join("samples").join("r1200_l0.05_original.pgm").is_file());
        assert!(out.join("samples").join("r1200_l0.05_reconstructed.pgm").is_file());

        // rerun is deterministic
        let again = evaluate(Some(&model), None, &manifest, Split::Test, &dir.path().join("r2")).unwrap();
        assert_eq!(report, again);
    }

    #[test]
    fn evaluate_rejects_class_set_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let corpus_cfg = CorpusConfig { frames: 6, width: 32, height: 32, ..Default::default() };
        let manifest = build_corpus(&corpus_cfg, &dir.path().join("corpus")).unwrap();
        let other = ClassSets { rates: vec![800, 2400], losses: vec![0.01, 0.02] };
        let model = GanModel::new(32, 32, other, 16, 3, 0).unwrap();
        assert!(evaluate(Some(&model), None, &manifest, Split::Test, &dir.path().join("out")).is_err());
    }

    #[test]
    fn comparison_table_has_one_row_per_model() {
        let dir = tempfile::tempdir().unwrap();
        let corpus_cfg = CorpusConfig { frames: 6, width: 32, height: 32, ..Default::default() };
        let manifest = build_corpus(&corpus_cfg, &dir.path().join("corpus")).unwrap();
        let gan = GanModel::new(32, 32, ClassSets::default(), 16, 3, 0).unwrap();
        let cnn = BaselineModel::new(32, 32, ClassSets::default(), 3, 0).unwrap();
        let report = evaluate(Some(&gan), Some(&cnn), &manifest, Split::Test, &dir.path().join("out")).unwrap();
        assert_eq!(report.models.len(), 2);
        assert_eq!(report.models[0].model_kind, "vqos_gan");
        assert_eq!(report.models[1].model_kind, "baseline_cnn");
    }

    #[test]
    fn render_table_lines_up() {
        let m = confusion(&[1200u32, 1600], &[1200u32, 1200], &[1200, 1600]).unwrap();
        let s = m.render_table("rate");
        assert!(s.contains("1200"));
        assert!(s.lines().count() >= 3);
    }
}
