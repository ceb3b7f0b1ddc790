//! Command-line definitions and the commands behind them.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use scnv_core::data::{decode_pgm, generate_synthetic, preprocess, split, SplitSpec};
use scnv_core::metrics::{check_threshold, classify, DEFAULT_THRESHOLD};
use scnv_core::nn::{grad_check_with, probe_case, Activation, Model};
use scnv_core::optim::{HyperParams, OptimizerKind};
use scnv_core::train::{evaluate, train_model, TrainConfig};

use crate::checkpoint::{load_checkpoint, save_checkpoint, CheckpointMeta};
use crate::error::{Error, Result};
use crate::experiment::{run_experiment, ExperimentSettings, DEFAULT_ZOOM};
use crate::manifest::{load_manifest, write_dataset};
use crate::report::{self, confusion_csv, format_evaluation, format_record, metrics_csv};

/// Largest relative gradient error `gradcheck` accepts.
pub const GRADCHECK_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Parser)]
#[command(name = "scnv", version, about = "Train and evaluate a small binary image classifier")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic two-class PGM dataset and its manifest.
    Synth(SynthArgs),
    /// Train one model and save its checkpoint and per-epoch metrics.
    Train(TrainArgs),
    /// Train the four comparison models on one shared split.
    Experiment(ExperimentArgs),
    /// Score a checkpoint on a manifest and print the confusion matrix.
    Eval(EvalArgs),
    /// Print the probability and class of each image.
    Predict(PredictArgs),
    /// Compare analytic gradients with finite differences on small models.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptimizerArg {
    Adam,
    Rmsprop,
}

impl From<OptimizerArg> for OptimizerKind {
    fn from(o: OptimizerArg) -> Self {
        match o {
            OptimizerArg::Adam => OptimizerKind::Adam,
            OptimizerArg::Rmsprop => OptimizerKind::RmsProp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ActivationArg {
    Relu,
    LeakyRelu,
}

impl ActivationArg {
    fn with_slope(self, slope: f64) -> Activation {
        match self {
            ActivationArg::Relu => Activation::Relu,
            ActivationArg::LeakyRelu => Activation::LeakyRelu { slope },
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Images per class.
    #[arg(long, default_value_t = 375, value_parser = clap::value_parser!(u64).range(1..))]
    pub n_per_class: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Settings shared by `train` and `experiment`.
#[derive(Debug, Args)]
pub struct TrainingFlags {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    pub epochs: u64,
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..))]
    pub batch_size: u64,
    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Negative-side slope whenever leaky relu is used.
    #[arg(long, default_value_t = Activation::DEFAULT_LEAKY_SLOPE)]
    pub leaky_slope: f64,
    /// Share of the manifest used for training.
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    /// Exact number of training samples; overrides --train-fraction.
    #[arg(long)]
    pub train_count: Option<usize>,
}

impl TrainingFlags {
    fn config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs as usize,
            batch_size: self.batch_size as usize,
            seed: self.seed,
            hyper: HyperParams {
                learning_rate: self.lr,
                ..HyperParams::default()
            },
            threshold: self.threshold,
            ..TrainConfig::default()
        }
    }

    fn split(&self) -> Result<SplitSpec> {
        let spec = SplitSpec {
            train_fraction: self.train_fraction,
            train_count: self.train_count,
            seed: self.seed,
        };
        // checks the fraction; the count is checked once the manifest is loaded
        spec.train_len(self.train_count.unwrap_or(0))?;
        Ok(spec)
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory for `model.ckpt` and `metrics.csv`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = OptimizerArg::Adam)]
    pub optimizer: OptimizerArg,
    /// Activation after the first convolution.
    #[arg(long, value_enum, default_value_t = ActivationArg::Relu)]
    pub first_activation: ActivationArg,
    /// Random zoom range for training images; 0 disables augmentation.
    #[arg(long, default_value_t = 0.0)]
    pub zoom: f64,
    #[command(flatten)]
    pub training: TrainingFlags,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory for per-model metrics, checkpoints and `summary.csv`.
    #[arg(long)]
    pub out: PathBuf,
    /// Random zoom range for the augmented model.
    #[arg(long, default_value_t = DEFAULT_ZOOM)]
    pub zoom: f64,
    #[command(flatten)]
    pub training: TrainingFlags,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Directory for `confusion.csv`.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// PGM images to classify.
    #[arg(required = true)]
    pub images: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    /// First of the consecutive seeds checked.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub seeds: u64,
    #[arg(long, value_enum, default_value_t = ActivationArg::Relu)]
    pub first_activation: ActivationArg,
    #[arg(long, default_value_t = Activation::DEFAULT_LEAKY_SLOPE)]
    pub leaky_slope: f64,
    /// Doubles one analytic gradient before comparing; the check must fail.
    #[arg(long, hide = true)]
    pub inject_bug: bool,
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Runs one command, writing results to `out` and progress to stderr.
/// Returns the process exit code for runs that complete.
pub fn run(cli: Cli, out: &mut impl Write) -> Result<u8> {
    match cli.command {
        Command::Synth(a) => synth(&a, out),
        Command::Train(a) => train(&a, out),
        Command::Experiment(a) => experiment(&a, out),
        Command::Eval(a) => eval(&a, out),
        Command::Predict(a) => predict(&a, out),
        Command::Gradcheck(a) => gradcheck(&a, out),
    }
}

fn stdout_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn synth(a: &SynthArgs, out: &mut impl Write) -> Result<u8> {
    let data = generate_synthetic(a.n_per_class as usize, a.seed)?;
    let manifest = write_dataset(&data, &a.out)?;
    let (neg, pos) = data.class_counts();
    writeln!(out, "wrote {} images to {}", data.len(), manifest.display()).map_err(stdout_err)?;
    writeln!(out, "class 0: {neg}\nclass 1: {pos}").map_err(stdout_err)?;
    Ok(0)
}

fn train(a: &TrainArgs, out: &mut impl Write) -> Result<u8> {
    let config = TrainConfig {
        optimizer: a.optimizer.into(),
        first_layer_activation: a.first_activation.with_slope(a.training.leaky_slope),
        zoom_range: a.zoom,
        ..a.training.config()
    };
    config.validate()?;
    let spec = a.training.split()?;
    let data = load_manifest(&a.manifest)?;
    let (train_set, val_set) = split(&data, &spec)?;
    create_dir(&a.out)?;

    let model = Model::build(config.model_config(), config.seed)?;
    let (model, history) = train_model(model, &config, &train_set, &val_set, |r| {
        eprintln!("{}", format_record(r));
    })?;
    let metrics = a.out.join("metrics.csv");
    report::write(&metrics, &metrics_csv(&history.records))?;
    let ckpt = a.out.join("model.ckpt");
    let meta = CheckpointMeta {
        seed: config.seed,
        epochs: history.len(),
    };
    save_checkpoint(&model, meta, &ckpt)?;
    let last = history.last().expect("at least one epoch");
    writeln!(out, "{}", format_record(last)).map_err(stdout_err)?;
    writeln!(out, "checkpoint: {}\nmetrics: {}", ckpt.display(), metrics.display()).map_err(stdout_err)?;
    Ok(0)
}

fn experiment(a: &ExperimentArgs, out: &mut impl Write) -> Result<u8> {
    let settings = ExperimentSettings {
        train: a.training.config(),
        leaky_slope: a.training.leaky_slope,
        zoom_range: a.zoom,
        split: a.training.split()?,
    };
    for (_, cfg) in settings.configs() {
        cfg.validate()?;
    }
    let data = load_manifest(&a.manifest)?;
    let report = run_experiment(&data, &settings, &a.out, |spec, r| {
        eprintln!("{}: {}", spec.name, format_record(r));
    })?;
    write!(out, "{report}").map_err(stdout_err)?;
    writeln!(out, "summary: {}", report.summary_path.display()).map_err(stdout_err)?;
    Ok(0)
}

fn eval(a: &EvalArgs, out: &mut impl Write) -> Result<u8> {
    check_threshold(a.threshold)?;
    let (model, _) = load_checkpoint(&a.checkpoint)?;
    let data = load_manifest(&a.manifest)?;
    let e = evaluate(&model, &data, a.threshold)?;
    create_dir(&a.out)?;
    let path = a.out.join("confusion.csv");
    report::write(&path, &confusion_csv(&e.confusion))?;
    write!(out, "{}", format_evaluation(&e)).map_err(stdout_err)?;
    writeln!(out, "confusion: {}", path.display()).map_err(stdout_err)?;
    Ok(0)
}

fn predict_one(model: &Model, path: &Path, threshold: f64) -> Result<(f64, u8)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let image = preprocess(&decode_pgm(&bytes)?)?;
    let p = model.predict(&image)?;
    Ok((p, classify(p, threshold)?))
}

fn predict(a: &PredictArgs, out: &mut impl Write) -> Result<u8> {
    check_threshold(a.threshold)?;
    let (model, _) = load_checkpoint(&a.checkpoint)?;
    let mut failed = 0;
    for path in &a.images {
        match predict_one(&model, path, a.threshold) {
            Ok((p, label)) => writeln!(out, "{}, {p:.6}, {label}", path.display()).map_err(stdout_err)?,
            Err(e) => {
                failed += 1;
                match e {
                    Error::Io { .. } => eprintln!("error: {e}"),
                    _ => eprintln!("error: {}: {e}", path.display()),
                }
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} of {} images failed", a.images.len());
        return Ok(1);
    }
    Ok(0)
}

fn gradcheck(a: &GradcheckArgs, out: &mut impl Write) -> Result<u8> {
    let act = a.first_activation.with_slope(a.leaky_slope);
    act.validate()?;
    let mut per_param: Vec<(String, f64)> = Vec::new();
    let mut worst = 0.0f64;
    for seed in a.seed..a.seed + a.seeds {
        let (model, image, label) = probe_case(seed, act)?;
        let report = grad_check_with(&model, &image, label, |g| {
            if a.inject_bug {
                if let Some(t) = g.tensors_mut().last_mut() {
                    *t = t.scale(2.0);
                }
            }
        })?;
        writeln!(out, "seed {seed}: max relative error {:.3e}", report.max_relative_error).map_err(stdout_err)?;
        worst = worst.max(report.max_relative_error);
        if per_param.is_empty() {
            per_param = report.per_param.iter().map(|(n, _)| (n.clone(), 0.0)).collect();
        }
        for ((_, w), (_, e)) in per_param.iter_mut().zip(&report.per_param) {
            *w = w.max(*e);
        }
    }
    writeln!(out, "worst relative error per parameter:").map_err(stdout_err)?;
    for (name, e) in &per_param {
        writeln!(out, "  {name:<16} {e:.3e}").map_err(stdout_err)?;
    }
    let pass = worst <= GRADCHECK_TOLERANCE;
    writeln!(
        out,
        "worst {worst:.3e}, tolerance {GRADCHECK_TOLERANCE:e}: {}",
        if pass { "PASS" } else { "FAIL" }
    )
    .map_err(stdout_err)?;
    Ok(if pass { 0 } else { 1 })
}
