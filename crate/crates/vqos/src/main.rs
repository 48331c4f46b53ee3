//! vqos: corpus generation, training, evaluation, prediction, and
//! reconstruction from one binary.
//!
//! Machine-readable JSON goes to stdout; human-readable tables and progress
//! go to stderr. Exit codes: 0 success, 2 usage error, 3 data/corpus error,
//! 4 numeric failure, 5 I/O error.

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use vqos::corpus::{build_corpus, CorpusConfig, CorpusManifest, Frame, Motif, Split};
use vqos::emulator::{ClassSets, NetworkState, RateConfig};
use vqos::error::VqosError;
use vqos::eval::evaluate;
use vqos::model::{
    baseline_train, load_checkpoint, predict, reconstruct, train_gan, BaselineModel, GanModel,
    TrainConfig, BASELINE_KIND, GAN_KIND,
};

#[derive(Parser)]
#[command(name = "vqos", version, about = "Desk-scale network-state estimation from degraded video")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic degradation corpus over the (rate, loss) grid
    GenCorpus(GenCorpusArgs),
    /// Train the GAN, the paired-CNN baseline, or both
    Train(TrainArgs),
    /// Evaluate checkpoints on a corpus split and write a report
    Eval(EvalArgs),
    /// Classify the network state of a received frame
    Predict(PredictArgs),
    /// Reconstruct a received frame (predicting labels first if not given)
    Reconstruct(ReconstructArgs),
}

#[derive(clap::Args)]
struct GenCorpusArgs {
    /// Output directory for the corpus
    #[arg(long)]
    out: PathBuf,
    /// Number of source video frames
    #[arg(long, default_value_t = 200)]
    frames: usize,
    /// Frame size as WxH (multiples of 8)
    #[arg(long, default_value = "64x64")]
    size: String,
    /// Data-rate classes in kbps, ascending
    #[arg(long, default_value = "1200,1600")]
    rates: String,
    /// Packet-loss classes, ascending
    #[arg(long, default_value = "0.05,0.10,0.25")]
    losses: String,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Source video motif: moving-rectangle, moving-disc, gradient-noise, checker-drift
    #[arg(long, default_value = "gradient-noise")]
    motif: String,
    /// Fraction of source frames assigned to the train split
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelChoice {
    Gan,
    Baseline,
    Both,
}

#[derive(clap::Args)]
struct TrainArgs {
    /// Corpus directory (from gen-corpus)
    #[arg(long)]
    corpus: PathBuf,
    /// Output directory for checkpoints and metrics
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = ModelChoice::Gan)]
    model: ModelChoice,
    /// JSON file with TrainConfig overrides (flags still win)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Generator latent dimension
    #[arg(long)]
    latent: Option<usize>,
    #[arg(long)]
    lr_g: Option<f64>,
    #[arg(long)]
    lr_d: Option<f64>,
    #[arg(long)]
    lambda_adv: Option<f64>,
    #[arg(long)]
    lambda_rec: Option<f64>,
    #[arg(long)]
    lambda_cls: Option<f64>,
    #[arg(long)]
    checkpoint_interval: Option<usize>,
    /// Disable block-aligned shift augmentation of training pairs
    #[arg(long)]
    no_augment: bool,
}

#[derive(clap::Args)]
struct EvalArgs {
    /// Checkpoint to evaluate (GAN or baseline; detected from metadata)
    #[arg(long)]
    model: PathBuf,
    /// Second checkpoint for a two-row comparison table
    #[arg(long)]
    baseline: Option<PathBuf>,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value = "test")]
    split: String,
    /// Report output directory
    #[arg(long)]
    report: PathBuf,
}

#[derive(clap::Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Received (degraded) frame, PGM
    #[arg(long)]
    frame: PathBuf,
    /// Original frame; required by baseline checkpoints
    #[arg(long)]
    original: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ReconstructArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    frame: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Condition labels as RATE,LOSS (e.g. 1600,0.25); predicted when absent
    #[arg(long)]
    labels: Option<String>,
}

fn exit_code_for(err: &VqosError) -> u8 {
    match err {
        VqosError::InvalidArgument(_) | VqosError::Shape(_) => 2,
        VqosError::Corpus(_) | VqosError::Codec(_) | VqosError::Checkpoint(_) => 3,
        VqosError::NonFinite(_) => 4,
        VqosError::Io { .. } => 5,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::GenCorpus(args) => cmd_gen_corpus(args),
        Cmd::Train(args) => cmd_train(args),
        Cmd::Eval(args) => cmd_eval(args),
        Cmd::Predict(args) => cmd_predict(args),
        Cmd::Reconstruct(args) => cmd_reconstruct(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

type Result<T> = std::result::Result<T, VqosError>;

fn parse_size(s: &str) -> Result<(usize, usize)> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| VqosError::InvalidArgument(format!("size '{s}' is not WxH")))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|_| VqosError::InvalidArgument(format!("bad size component '{v}'")))
    };
    Ok((parse(w)?, parse(h)?))
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<T>()
                .map_err(|_| VqosError::InvalidArgument(format!("bad {what} value '{v}'")))
        })
        .collect()
}

fn emit(value: serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(&value).expect("json serializes"));
}

fn cmd_gen_corpus(args: GenCorpusArgs) -> Result<()> {
    let (width, height) = parse_size(&args.size)?;
    let motif: Motif = args.motif.parse()?;
    let classes = ClassSets { rates: parse_list(&args.rates, "rate")?, losses: parse_list(&args.losses, "loss")? };
    let cfg = CorpusConfig {
        frames: args.frames,
        width,
        height,
        motif,
        seed: args.seed,
        train_fraction: args.train_fraction,
        classes,
        emulator: RateConfig::default(),
    };
    eprintln!("resolved config: {}", serde_json::to_string(&cfg).expect("config serializes"));
    let manifest = build_corpus(&cfg, &args.out)?;
    manifest.verify()?;
    let conditions = cfg.classes.conditions().len();
    eprintln!(
        "corpus: {} source frames x {} conditions = {} degraded frames at {}",
        cfg.frames,
        conditions,
        manifest.records.len(),
        args.out.display()
    );
    emit(json!({
        "schema_version": 1,
        "corpus": args.out,
        "frames": cfg.frames,
        "conditions": conditions,
        "records": manifest.records.len(),
        "train_records": manifest.split_records(Split::Train).len(),
        "test_records": manifest.split_records(Split::Test).len(),
        "config_hash": manifest.header.config_hash,
    }));
    Ok(())
}

fn resolve_train_config(args: &TrainArgs) -> Result<TrainConfig> {
    // defaults < config file < explicit flags
    #[derive(Deserialize, Default)]
    #[serde(deny_unknown_fields)]
    struct Overlay {
        epochs: Option<usize>,
        batch: Option<usize>,
        seed: Option<u64>,
        latent: Option<usize>,
        lr_g: Option<f64>,
        lr_d: Option<f64>,
        lambda_adv: Option<f64>,
        lambda_rec: Option<f64>,
        lambda_cls: Option<f64>,
        checkpoint_interval: Option<usize>,
        augment: Option<bool>,
    }
    let overlay: Overlay = match &args.config {
        None => Overlay::default(),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| VqosError::io(path.display().to_string(), e))?;
            serde_json::from_str(&text)
                .map_err(|e| VqosError::InvalidArgument(format!("{}: {e}", path.display())))?
        }
    };
    let mut cfg = TrainConfig::default();
    let pick = |flag: Option<usize>, file: Option<usize>, dflt: usize| flag.or(file).unwrap_or(dflt);
    cfg.epochs = pick(args.epochs, overlay.epochs, cfg.epochs);
    cfg.batch = pick(args.batch, overlay.batch, cfg.batch);
    cfg.latent = pick(args.latent, overlay.latent, cfg.latent);
    cfg.checkpoint_interval = pick(args.checkpoint_interval, overlay.checkpoint_interval, cfg.checkpoint_interval);
    cfg.seed = args.seed.or(overlay.seed).unwrap_or(cfg.seed);
    cfg.lr_g = args.lr_g.or(overlay.lr_g).unwrap_or(cfg.lr_g);
    cfg.lr_d = args.lr_d.or(overlay.lr_d).unwrap_or(cfg.lr_d);
    cfg.lambda_adv = args.lambda_adv.or(overlay.lambda_adv).unwrap_or(cfg.lambda_adv);
    cfg.lambda_rec = args.lambda_rec.or(overlay.lambda_rec).unwrap_or(cfg.lambda_rec);
    cfg.lambda_cls = args.lambda_cls.or(overlay.lambda_cls).unwrap_or(cfg.lambda_cls);
    cfg.augment = if args.no_augment { false } else { overlay.augment.unwrap_or(cfg.augment) };
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let cfg = resolve_train_config(&args)?;
    eprintln!(
        "resolved config: {{\"epochs\":{},\"batch\":{},\"lr_g\":{},\"lr_d\":{},\"lambda_adv\":{},\"lambda_rec\":{},\"lambda_cls\":{},\"latent\":{},\"seed\":{},\"checkpoint_interval\":{},\"augment\":{}}}",
        cfg.epochs, cfg.batch, cfg.lr_g, cfg.lr_d, cfg.lambda_adv, cfg.lambda_rec, cfg.lambda_cls,
        cfg.latent, cfg.seed, cfg.checkpoint_interval, cfg.augment
    );
    let manifest = CorpusManifest::load(&args.corpus)?;
    let mut out = json!({
        "schema_version": 1,
        "corpus": args.corpus,
        "out": args.out,
        "epochs": cfg.epochs,
    });
    if matches!(args.model, ModelChoice::Gan | ModelChoice::Both) {
        let (ckpt, history) = train_gan(&cfg, &manifest, &args.out)?;
        if let Some(last) = history.last() {
            eprintln!(
                "gan: epoch {} disc_loss {:.4} gen_loss {:.4} joint_acc {:.3} psnr {:.2}",
                last.epoch, last.disc_loss, last.gen_loss, last.joint_acc, last.recon_psnr
            );
        }
        out["gan_checkpoint"] = json!(ckpt);
        out["gan_metrics"] = json!(args.out.join("metrics_gan.csv"));
    }
    if matches!(args.model, ModelChoice::Baseline | ModelChoice::Both) {
        let (ckpt, history) = baseline_train(&cfg, &manifest, &args.out)?;
        if let Some(last) = history.last() {
            eprintln!(
                "baseline: epoch {} loss {:.4} joint_acc {:.3}",
                last.epoch, last.loss, last.joint_acc
            );
        }
        out["baseline_checkpoint"] = json!(ckpt);
        out["baseline_metrics"] = json!(args.out.join("metrics_baseline.csv"));
    }
    if args.model == ModelChoice::Both {
        // one command, one comparison table: evaluate both on the test split
        let gan = GanModel::load(&args.out.join("gan.ckpt"))?;
        let baseline = BaselineModel::load(&args.out.join("baseline.ckpt"))?;
        let report = evaluate(Some(&gan), Some(&baseline), &manifest, Split::Test, &args.out)?;
        eprint!("{}", comparison_table(&report));
        out["comparison"] = json!(args.out.join("comparison.csv"));
        out["report"] = json!(args.out.join("report.json"));
    }
    emit(out);
    Ok(())
}

fn comparison_table(report: &vqos::eval::EvalReport) -> String {
    let mut s = format!("{:<14} {:>9} {:>9} {:>9}\n", "model", "rate_acc", "loss_acc", "joint_acc");
    for m in &report.models {
        s.push_str(&format!(
            "{:<14} {:>9.3} {:>9.3} {:>9.3}\n",
            m.model_kind, m.rate_acc, m.loss_acc, m.joint_acc
        ));
    }
    s
}

enum AnyModel {
    Gan(Box<GanModel>),
    Baseline(Box<BaselineModel>),
}

fn load_any(path: &Path) -> Result<AnyModel> {
    let (meta, _) = load_checkpoint(path)?;
    match meta.model_kind.as_str() {
        GAN_KIND => Ok(AnyModel::Gan(Box::new(GanModel::load(path)?))),
        BASELINE_KIND => Ok(AnyModel::Baseline(Box::new(BaselineModel::load(path)?))),
        other => Err(VqosError::Checkpoint(format!("unknown model kind '{other}'"))),
    }
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let split: Split = args.split.parse()?;
    let manifest = CorpusManifest::load(&args.corpus)?;
    let primary = load_any(&args.model)?;
    let extra = args.baseline.as_deref().map(load_any).transpose()?;
    let (mut gan, mut baseline) = (None, None);
    for m in [Some(primary), extra].into_iter().flatten() {
        match m {
            AnyModel::Gan(g) => gan = Some(g),
            AnyModel::Baseline(b) => baseline = Some(b),
        }
    }
    let report = evaluate(gan.as_deref(), baseline.as_deref(), &manifest, split, &args.report)?;
    for m in &report.models {
        eprint!("{}", m.confusion_rate.render_table(&format!("{} rate classes", m.model_kind)));
        eprint!("{}", m.confusion_loss.render_table(&format!("{} loss classes", m.model_kind)));
    }
    eprint!("{}", comparison_table(&report));
    emit(serde_json::to_value(&report).expect("report serializes"));
    Ok(())
}

fn parse_labels(s: &str) -> Result<NetworkState> {
    let (r, l) = s
        .split_once(',')
        .ok_or_else(|| VqosError::InvalidArgument(format!("labels '{s}' are not RATE,LOSS")))?;
    let rate = r
        .trim()
        .parse::<u32>()
        .map_err(|_| VqosError::InvalidArgument(format!("bad rate '{r}'")))?;
    let loss = l
        .trim()
        .parse::<f64>()
        .map_err(|_| VqosError::InvalidArgument(format!("bad loss '{l}'")))?;
    Ok(NetworkState::new(rate, loss))
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let frame = Frame::read_pgm(&args.frame)?;
    let prediction = match load_any(&args.model)? {
        AnyModel::Gan(model) => predict(&model, &frame)?,
        AnyModel::Baseline(model) => {
            let org_path = args.original.as_ref().ok_or_else(|| {
                VqosError::InvalidArgument("baseline checkpoints need --original alongside --frame".into())
            })?;
            let org = Frame::read_pgm(org_path)?;
            vqos::model::baseline_predict(&model, &org, &frame)?
        }
    };
    eprintln!(
        "predicted: {} kbps, loss {} (validity {})",
        prediction.state.rate_kbps,
        prediction.state.loss_class,
        prediction.validity.map_or("n/a".to_string(), |v| format!("{v:.3}"))
    );
    emit(json!({
        "schema_version": 1,
        "rate_kbps": prediction.state.rate_kbps,
        "loss_class": prediction.state.loss_class,
        "rate_probs": prediction.rate_probs,
        "loss_probs": prediction.loss_probs,
        "validity": prediction.validity,
    }));
    Ok(())
}

fn cmd_reconstruct(args: ReconstructArgs) -> Result<()> {
    let frame = Frame::read_pgm(&args.frame)?;
    let model = match load_any(&args.model)? {
        AnyModel::Gan(model) => model,
        AnyModel::Baseline(_) => {
            return Err(VqosError::Checkpoint("reconstruction needs a GAN checkpoint".into()))
        }
    };
    let labels = args.labels.as_deref().map(parse_labels).transpose()?;
    let predicted = labels.is_none();
    let (recon, state) = reconstruct(&model, &frame, labels)?;
    recon.write_pgm(&args.out)?;
    eprintln!(
        "reconstructed {} -> {} under ({} kbps, loss {}){}",
        args.frame.display(),
        args.out.display(),
        state.rate_kbps,
        state.loss_class,
        if predicted { " [predicted]" } else { "" }
    );
    emit(json!({
        "schema_version": 1,
        "input": args.frame,
        "output": args.out,
        "rate_kbps": state.rate_kbps,
        "loss_class": state.loss_class,
        "labels_predicted": predicted,
    }));
    Ok(())
}
