//! Confusion counts and accuracy / precision / recall / F1.
//!
//! The positive class is `Label::Positive`. Ratios whose denominator is zero
//! are reported as 0 and flagged.

use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Counts after relabelling +1 ↔ −1 in both predictions and labels.
    pub fn swapped(&self) -> ConfusionCounts {
        ConfusionCounts { tp: self.tn, fp: self.fn_, fn_: self.fp, tn: self.tp }
    }
}

pub fn confusion(predictions: &[Label], labels: &[Label]) -> Result<ConfusionCounts> {
    if predictions.len() != labels.len() {
        return Err(Error::Dimension { expected: labels.len(), actual: predictions.len() });
    }
    if labels.is_empty() {
        return Err(Error::argument("no predictions to score"));
    }
    let mut c = ConfusionCounts::default();
    for (p, y) in predictions.iter().zip(labels) {
        match (p, y) {
            (Label::Positive, Label::Positive) => c.tp += 1,
            (Label::Positive, Label::Negative) => c.fp += 1,
            (Label::Negative, Label::Positive) => c.fn_ += 1,
            (Label::Negative, Label::Negative) => c.tn += 1,
        }
    }
    Ok(c)
}

/// Which ratios hit a zero denominator and were set to 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Degeneracy {
    pub precision: bool,
    pub recall: bool,
    pub f1: bool,
}

impl Degeneracy {
    pub fn any(&self) -> bool {
        self.precision || self.recall || self.f1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub degenerate: Degeneracy,
}

fn ratio(num: f64, den: f64) -> (f64, bool) {
    if den == 0.0 {
        (0.0, true)
    } else {
        (num / den, false)
    }
}

pub fn compute_metrics(counts: &ConfusionCounts) -> Result<Metrics> {
    let total = counts.total();
    if total == 0 {
        return Err(Error::argument("confusion counts are empty"));
    }
    let (tp, fp, fn_, tn) = (counts.tp as f64, counts.fp as f64, counts.fn_ as f64, counts.tn as f64);
    let (precision, p_flag) = ratio(tp, tp + fp);
    let (recall, r_flag) = ratio(tp, tp + fn_);
    let (f1, f_flag) = if p_flag || r_flag {
        (0.0, true)
    } else {
        ratio(2.0 * precision * recall, precision + recall)
    };
    Ok(Metrics {
        accuracy: (tp + tn) / total as f64,
        precision,
        recall,
        f1,
        degenerate: Degeneracy { precision: p_flag, recall: r_flag, f1: f_flag },
    })
}

/// Metrics tagged with the run that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub model: String,
    pub feature_count: usize,
    pub shots: u64,
    pub seed: u64,
    pub counts: ConfusionCounts,
    pub metrics: Metrics,
}

impl MetricsRecord {
    pub fn from_predictions(
        model: impl Into<String>,
        feature_count: usize,
        shots: u64,
        seed: u64,
        predictions: &[Label],
        labels: &[Label],
    ) -> Result<Self> {
        let counts = confusion(predictions, labels)?;
        Ok(MetricsRecord {
            model: model.into(),
            feature_count,
            shots,
            seed,
            counts,
            metrics: compute_metrics(&counts)?,
        })
    }
}
