//! Cross-validation harness and the metrics behind every report.
//!
//! All metrics are computed for the Negative class against everything else.
//! Fold predictions are pooled before metrics are computed.

mod cv;
mod recall;
mod report;

pub use cv::{
    baseline_cv, cross_validate, cross_validate_detailed, learning_curve, pooled_report, run_grid,
    BaselineKind, CvOutcome, GridCell, ScoredPrediction,
};
pub use recall::{
    counts_at_threshold, ensemble_predict, ensemble_report, system_agreement_table, threshold_sweep,
    AgreementTable, BinaryLabel, EnsembleReport, SystemMetrics,
};
pub use report::{curve_csv, render_agreement_table, render_confusion, render_grid};

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotation::LabeledInstance;
use crate::error::{Error, Result};

pub const DEFAULT_FOLDS: usize = 10;

/// Assignment of strict instances to cross-validation folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignments: BTreeMap<String, usize>,
}

impl FoldPlan {
    pub fn fold_of(&self, tweet_id: &str) -> Option<usize> {
        self.assignments.get(tweet_id).copied()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for f in self.assignments.values() {
            sizes[*f] += 1;
        }
        sizes
    }
}

/// Seeded shuffle followed by round-robin assignment.
pub fn make_folds(strict: &[LabeledInstance], k: usize, seed: u64) -> Result<FoldPlan> {
    if k == 0 || k > strict.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot split {} strict instances into {k} folds",
            strict.len()
        )));
    }
    let mut order: Vec<usize> = (0..strict.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignments = BTreeMap::new();
    for (pos, idx) in order.into_iter().enumerate() {
        if assignments.insert(strict[idx].tweet_id.clone(), pos % k).is_some() {
            return Err(Error::DuplicateId(strict[idx].tweet_id.clone()));
        }
    }
    Ok(FoldPlan { k, seed, assignments })
}

/// Binary confusion counts for the Negative class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl BinaryCounts {
    /// Tally `(gold_is_negative, predicted_negative)` pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (bool, bool)>) -> Self {
        let mut c = BinaryCounts::default();
        for (gold, pred) in pairs {
            match (gold, pred) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// Harmonic mean of precision and recall; 0 when both are 0.
    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Rank-based (Mann-Whitney) AUC with average ranks for ties.
///
/// Each item is `(score, is_positive)`; positives should score higher.
pub fn compute_auc(scored: &[(f64, bool)]) -> Result<f64> {
    let positives = scored.iter().filter(|(_, p)| *p).count();
    let negatives = scored.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::Degenerate("AUC needs both classes".into()));
    }
    let mut sorted: Vec<&(f64, bool)> = scored.iter().collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1].0 == sorted[i].0 {
            j += 1;
        }
        // Ranks i+1..=j+1 share their average.
        let avg_rank = (i + j + 2) as f64 / 2.0;
        let tied_pos = sorted[i..=j].iter().filter(|(_, p)| *p).count();
        rank_sum += avg_rank * tied_pos as f64;
        i = j + 1;
    }
    let p = positives as f64;
    let n = negatives as f64;
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Gold-by-predicted count matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub gold_labels: Vec<String>,
    pub predicted_labels: Vec<String>,
    /// `counts[gold][predicted]`.
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(gold_labels: &[&str], predicted_labels: &[&str]) -> Self {
        ConfusionMatrix {
            gold_labels: gold_labels.iter().map(|s| s.to_string()).collect(),
            predicted_labels: predicted_labels.iter().map(|s| s.to_string()).collect(),
            counts: vec![vec![0; predicted_labels.len()]; gold_labels.len()],
        }
    }

    pub fn add(&mut self, gold: &str, predicted: &str) -> Result<()> {
        let g = self.gold_labels.iter().position(|l| l == gold);
        let p = self.predicted_labels.iter().position(|l| l == predicted);
        match (g, p) {
            (Some(g), Some(p)) => {
                self.counts[g][p] += 1;
                Ok(())
            }
            _ => Err(Error::InvalidRecord(format!(
                "label pair ({gold:?}, {predicted:?}) not in confusion matrix"
            ))),
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }
}

/// Negative-class metrics plus the full confusion matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
    pub confusion: ConfusionMatrix,
    pub n_test: usize,
}

impl EvalReport {
    pub fn counts(&self) -> BinaryCounts {
        let neg = |labels: &[String]| labels.iter().position(|l| l == crate::annotation::NEGATIVE);
        let (g, p) = (neg(&self.confusion.gold_labels), neg(&self.confusion.predicted_labels));
        let mut c = BinaryCounts::default();
        for (gi, row) in self.confusion.counts.iter().enumerate() {
            for (pi, n) in row.iter().enumerate() {
                match (Some(gi) == g, Some(pi) == p) {
                    (true, true) => c.tp += n,
                    (false, true) => c.fp += n,
                    (true, false) => c.fn_ += n,
                    (false, false) => c.tn += n,
                }
            }
        }
        c
    }
}

/// A point on a learning curve or threshold sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Training fraction or score threshold.
    pub x: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: Option<f64>,
}
