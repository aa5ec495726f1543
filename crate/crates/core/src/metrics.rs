//! Confusion-matrix accounting for binary decisions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("prediction count {pred} does not match ground-truth count {actual}")]
    LengthMismatch { pred: usize, actual: usize },
    #[error("no samples to evaluate")]
    Empty,
}

pub const FLAG_NO_POSITIVES: &str = "sensitivity_undefined";
pub const FLAG_NO_NEGATIVES: &str = "specificity_undefined";

/// Counts plus derived rates. A rate whose denominator is zero is `None` and
/// the matching flag is listed in `flags`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub accuracy: f64,
    pub flags: Vec<String>,
}

impl MetricsReport {
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        let mut flags = Vec::new();
        let sensitivity = if tp + fn_ > 0 {
            Some(tp as f64 / (tp + fn_) as f64)
        } else {
            flags.push(FLAG_NO_POSITIVES.to_string());
            None
        };
        let specificity = if tn + fp > 0 {
            Some(tn as f64 / (tn + fp) as f64)
        } else {
            flags.push(FLAG_NO_NEGATIVES.to_string());
            None
        };
        let total = tp + fp + tn + fn_;
        let accuracy = if total > 0 {
            (tp + tn) as f64 / total as f64
        } else {
            0.0
        };
        Self {
            tp,
            fp,
            tn,
            fn_,
            sensitivity,
            specificity,
            accuracy,
            flags,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Pools the counts of several reports.
    pub fn pooled<'a>(reports: impl IntoIterator<Item = &'a MetricsReport>) -> Self {
        let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
        for r in reports {
            tp += r.tp;
            fp += r.fp;
            tn += r.tn;
            fn_ += r.fn_;
        }
        Self::from_counts(tp, fp, tn, fn_)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Tallies predictions against ground truth with `positive` as the positive
/// class; every other value counts as negative.
pub fn confusion<T: PartialEq>(
    pred: &[T],
    actual: &[T],
    positive: &T,
) -> Result<MetricsReport, MetricsError> {
    if pred.len() != actual.len() {
        return Err(MetricsError::LengthMismatch {
            pred: pred.len(),
            actual: actual.len(),
        });
    }
    if pred.is_empty() {
        return Err(MetricsError::Empty);
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (p, a) in pred.iter().zip(actual) {
        match (p == positive, a == positive) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    Ok(MetricsReport::from_counts(tp, fp, tn, fn_))
}
