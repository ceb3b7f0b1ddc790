//! CSV and text renderings of training and evaluation results.

use std::fs;
use std::path::Path;

use scnv_core::metrics::{ConfusionMatrix, EpochRecord};
use scnv_core::train::Evaluation;

use crate::error::{Error, Result};

pub const METRICS_HEADER: [&str; 5] = ["epoch", "train_loss", "train_accuracy", "val_loss", "val_accuracy"];
pub const CONFUSION_HEADER: [&str; 4] = ["tp", "fp", "tn", "fn"];

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn to_string(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("writing to memory cannot fail");
    String::from_utf8(bytes).expect("csv output is UTF-8")
}

/// One row per epoch. Floats use the shortest text that reads back to the
/// same value; missing validation metrics are empty cells.
pub fn metrics_csv(records: &[EpochRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(METRICS_HEADER).expect("in-memory write");
    for r in records {
        w.write_record([
            r.epoch.to_string(),
            r.train_loss.to_string(),
            r.train_accuracy.to_string(),
            opt(r.val_loss),
            opt(r.val_accuracy),
        ])
        .expect("in-memory write");
    }
    to_string(w)
}

pub fn confusion_csv(m: &ConfusionMatrix) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CONFUSION_HEADER).expect("in-memory write");
    w.write_record(
        [m.true_positives, m.false_positives, m.true_negatives, m.false_negatives].map(|n| n.to_string()),
    )
    .expect("in-memory write");
    to_string(w)
}

/// Text block printed by `scnv eval`.
pub fn format_evaluation(e: &Evaluation) -> String {
    format!(
        "loss: {:.6}\naccuracy: {}\ntotal: {}\n{}\n",
        e.mean_loss,
        e.accuracy,
        e.confusion.total(),
        e.confusion
    )
}

pub fn format_record(r: &EpochRecord) -> String {
    let mut s = format!(
        "epoch {}: train_loss {:.6} train_acc {:.4}",
        r.epoch, r.train_loss, r.train_accuracy
    );
    if let (Some(loss), Some(acc)) = (r.val_loss, r.val_accuracy) {
        s.push_str(&format!(" val_loss {loss:.6} val_acc {acc:.4}"));
    }
    s
}

pub(crate) fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}
