//! The four-model comparison: RMSProp vs Adam, ReLU vs leaky ReLU in the
//! first layer, and zoom augmentation, all on one shared split.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use scnv_core::data::{split, Dataset, SplitSpec};
use scnv_core::metrics::EpochRecord;
use scnv_core::nn::{Activation, Model};
use scnv_core::optim::OptimizerKind;
use scnv_core::train::{train_model, TrainConfig};

use crate::checkpoint::{save_checkpoint, CheckpointMeta};
use crate::error::{Error, Result};
use crate::report::{self, metrics_csv};

pub const SUMMARY_HEADER: [&str; 6] = ["model", "train_acc", "val_acc", "train_loss", "val_loss", "notes"];
pub const SUMMARY_NAME: &str = "summary.csv";
pub const DEFAULT_ZOOM: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub optimizer: OptimizerKind,
    pub first_activation: Activation,
    pub zoom_range: f64,
    pub notes: String,
}

/// Model1 rmsprop + relu, Model2 adam + relu, Model3 adam with leaky relu
/// after the first convolution, Model4 adam + relu with zoom augmentation.
pub fn model_specs(leaky_slope: f64, zoom_range: f64) -> Vec<ModelSpec> {
    let spec = |n: usize, optimizer, first_activation, zoom_range, notes: String| ModelSpec {
        name: format!("Model{n}"),
        optimizer,
        first_activation,
        zoom_range,
        notes,
    };
    vec![
        spec(1, OptimizerKind::RmsProp, Activation::Relu, 0.0, "rmsprop; relu".into()),
        spec(2, OptimizerKind::Adam, Activation::Relu, 0.0, "adam; relu".into()),
        spec(
            3,
            OptimizerKind::Adam,
            Activation::LeakyRelu { slope: leaky_slope },
            0.0,
            format!("adam; leaky relu (slope {leaky_slope}) in first layer"),
        ),
        spec(
            4,
            OptimizerKind::Adam,
            Activation::Relu,
            zoom_range,
            format!("adam; relu; random zoom range {zoom_range}"),
        ),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSettings {
    /// Shared settings; optimizer, first activation and zoom come from each
    /// model's spec.
    pub train: TrainConfig,
    pub leaky_slope: f64,
    /// Zoom range for the augmented model.
    pub zoom_range: f64,
    pub split: SplitSpec,
}

impl ExperimentSettings {
    pub fn configs(&self) -> Vec<(ModelSpec, TrainConfig)> {
        model_specs(self.leaky_slope, self.zoom_range)
            .into_iter()
            .map(|spec| {
                let cfg = TrainConfig {
                    optimizer: spec.optimizer,
                    first_layer_activation: spec.first_activation,
                    zoom_range: spec.zoom_range,
                    ..self.train
                };
                (spec, cfg)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub spec: ModelSpec,
    pub config: TrainConfig,
    pub final_record: EpochRecord,
    pub metrics_path: PathBuf,
    pub checkpoint_path: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ExperimentRow>,
    pub summary_path: PathBuf,
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl ExperimentReport {
    pub fn summary_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(SUMMARY_HEADER).expect("in-memory write");
        for row in &self.rows {
            let r = &row.final_record;
            w.write_record([
                row.spec.name.clone(),
                r.train_accuracy.to_string(),
                cell(r.val_accuracy),
                r.train_loss.to_string(),
                cell(r.val_loss),
                row.spec.notes.clone(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("csv output is UTF-8")
    }
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<8} {:>9} {:>9} {:>11} {:>11}  notes",
            "model", "train_acc", "val_acc", "train_loss", "val_loss"
        )?;
        for row in &self.rows {
            let r = &row.final_record;
            let opt = |v: Option<f64>, p: usize| v.map_or("-".into(), |v| format!("{v:.p$}"));
            writeln!(
                f,
                "{:<8} {:>9.4} {:>9} {:>11.6} {:>11}  {}",
                row.spec.name,
                r.train_accuracy,
                opt(r.val_accuracy, 4),
                r.train_loss,
                opt(r.val_loss, 6),
                row.spec.notes
            )?;
        }
        Ok(())
    }
}

/// Trains all four models on one split of `dataset`, writing
/// `<name>.metrics.csv` and `<name>.ckpt` for each and `summary.csv` into
/// `out_dir`. Every config is validated before any training starts; a failed
/// run aborts with the model named.
pub fn run_experiment(
    dataset: &Dataset,
    settings: &ExperimentSettings,
    out_dir: impl AsRef<Path>,
    mut on_epoch: impl FnMut(&ModelSpec, &EpochRecord),
) -> Result<ExperimentReport> {
    let out_dir = out_dir.as_ref();
    let configs = settings.configs();
    for (spec, cfg) in &configs {
        cfg.validate().map_err(|e| Error::Run {
            model: spec.name.clone(),
            source: Box::new(e.into()),
        })?;
    }
    let (train_set, val_set) = split(dataset, &settings.split)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let mut rows = Vec::with_capacity(configs.len());
    for (spec, cfg) in configs {
        let mut run = || -> Result<ExperimentRow> {
            let model = Model::build(cfg.model_config(), cfg.seed)?;
            let (model, history) = train_model(model, &cfg, &train_set, &val_set, |r| on_epoch(&spec, r))?;
            let metrics_path = out_dir.join(format!("{}.metrics.csv", spec.name));
            report::write(&metrics_path, &metrics_csv(&history.records))?;
            let checkpoint_path = out_dir.join(format!("{}.ckpt", spec.name));
            let meta = CheckpointMeta {
                seed: cfg.seed,
                epochs: history.len(),
            };
            save_checkpoint(&model, meta, &checkpoint_path)?;
            Ok(ExperimentRow {
                spec: spec.clone(),
                config: cfg,
                final_record: *history.last().expect("at least one epoch"),
                metrics_path,
                checkpoint_path,
            })
        };
        rows.push(run().map_err(|e| Error::Run {
            model: spec.name.clone(),
            source: Box::new(e),
        })?);
    }
    let report = ExperimentReport {
        rows,
        summary_path: out_dir.join(SUMMARY_NAME),
    };
    report::write(&report.summary_path, &report.summary_csv())?;
    Ok(report)
}
