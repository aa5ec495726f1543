use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{induce, InductionConfig, LabeledRow, TreeError};
use crate::metrics::MetricsReport;

/// Assigns each row to one of `k` folds so every class is spread as evenly
/// as possible. Each class is shuffled with its own stream derived from
/// `seed`, and the round robin continues from class to class so fold sizes
/// differ by at most one.
pub fn stratified_folds(labels: &[usize], k: usize, seed: u64) -> Result<Vec<usize>, TreeError> {
    if k < 2 {
        return Err(TreeError::CrossValidation(format!("need at least 2 folds, got {k}")));
    }
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut fold = vec![0; labels.len()];
    let mut next = 0;
    for class in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < k {
            return Err(TreeError::CrossValidation(format!(
                "class {class} has {} rows, fewer than {k} folds",
                members.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(class as u64);
        members.shuffle(&mut rng);
        for i in members {
            fold[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(fold)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub folds: Vec<MetricsReport>,
    pub pooled: MetricsReport,
}

impl CvReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Stratified k-fold cross-validation: a tree is induced on each training
/// split and scored on the held-out fold with `positive` as the positive
/// class. The pooled report sums the per-fold confusion counts.
pub fn cross_validate(
    rows: &[LabeledRow],
    k: usize,
    config: &InductionConfig,
    seed: u64,
    positive: usize,
) -> Result<CvReport, TreeError> {
    if rows.is_empty() {
        return Err(TreeError::EmptyDataset);
    }
    let labels: Vec<usize> = rows.iter().map(|r| r.label).collect();
    let assignment = stratified_folds(&labels, k, seed)?;
    let mut folds = Vec::with_capacity(k);
    for f in 0..k {
        let train: Vec<LabeledRow> = rows
            .iter()
            .zip(&assignment)
            .filter(|(_, &a)| a != f)
            .map(|(r, _)| r.clone())
            .collect();
        let tree = induce(&train, config)?;
        let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
        for (r, _) in rows.iter().zip(&assignment).filter(|(_, &a)| a == f) {
            let p = tree.predict(&r.features)? == positive;
            match (p, r.label == positive) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, false) => tn += 1,
                (false, true) => fn_ += 1,
            }
        }
        folds.push(MetricsReport::from_counts(tp, fp, tn, fn_));
    }
    let pooled = MetricsReport::pooled(&folds);
    Ok(CvReport { folds, pooled })
}
