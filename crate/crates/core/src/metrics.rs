//! Binary cross-entropy, thresholding, and confusion-matrix metrics.
//!
//! Label 1 is the positive class.

use alloc::format;
use core::fmt;

use crate::error::{Error, Result};

/// A class label, 0 or 1.
pub type Label = u8;

/// Floor applied to the argument of each logarithm.
pub const PROB_CLAMP: f64 = 1e-12;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// `−[y ln p + (1−y) ln(1−p)]`, with each log argument floored at
/// [`PROB_CLAMP`]. A prediction exactly equal to its label costs exactly 0.
pub fn bce_loss(p: f64, y: Label) -> f64 {
    if y == 1 {
        -libm::log(p.max(PROB_CLAMP))
    } else {
        -libm::log((1.0 - p).max(PROB_CLAMP))
    }
}

/// `dL/dp = (p − y) / (p (1 − p))` on `p` clamped to `[ε, 1 − ε]`.
pub fn bce_grad(p: f64, y: Label) -> f64 {
    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    (p - f64::from(y)) / (p * (1.0 - p))
}

pub fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("threshold must lie in (0, 1), got {threshold}")))
    }
}

/// 1 iff `p >= threshold`; ties go to the positive class.
pub fn classify(p: f64, threshold: f64) -> Result<Label> {
    check_threshold(threshold)?;
    Ok(u8::from(p >= threshold))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct ConfusionMatrix {
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
}

impl ConfusionMatrix {
    pub fn record(&mut self, predicted: Label, actual: Label) {
        match (predicted, actual) {
            (1, 1) => self.true_positives += 1,
            (1, _) => self.false_positives += 1,
            (_, 1) => self.false_negatives += 1,
            _ => self.true_negatives += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }

    /// `(tp + tn) / total`; 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => (self.true_positives + self.true_negatives) as f64 / n as f64,
        }
    }
}

/// Rows are the actual class, columns the predicted class.
impl fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = [
            self.true_positives,
            self.false_positives,
            self.true_negatives,
            self.false_negatives,
        ]
        .iter()
        .map(|n| format!("{n}").len())
        .max()
        .unwrap_or(1)
        .max("predicted 1".len());
        writeln!(f, "{:>10}  {:>w$}  {:>w$}", "", "predicted 0", "predicted 1")?;
        writeln!(f, "{:>10}  {:>w$}  {:>w$}", "actual 0", self.true_negatives, self.false_positives)?;
        write!(f, "{:>10}  {:>w$}  {:>w$}", "actual 1", self.false_negatives, self.true_positives)
    }
}

/// Cell counts for paired predictions and labels.
pub fn confusion(predictions: &[Label], labels: &[Label]) -> Result<ConfusionMatrix> {
    if predictions.len() != labels.len() {
        return Err(Error::Consistency(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::Input("confusion matrix needs at least one sample".into()));
    }
    let mut m = ConfusionMatrix::default();
    for (&p, &y) in predictions.iter().zip(labels) {
        m.record(p, y);
    }
    Ok(m)
}

/// Metrics after one training epoch. Validation fields are `None` when the
/// validation set is empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: Option<f64>,
    pub val_accuracy: Option<f64>,
}
