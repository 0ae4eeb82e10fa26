use serde::{Deserialize, Serialize};

use super::{BinaryCounts, CurvePoint, CvOutcome};
use crate::baselines::LexiconLabel;
use crate::error::{Error, Result};
use crate::models::Prediction;

/// Precision/recall/F1 of predicting Negative for every score `>= threshold`,
/// one point per distinct score from highest to lowest.
pub fn threshold_sweep(scored: &[(f64, bool)]) -> Vec<CurvePoint> {
    let mut sorted: Vec<(f64, bool)> = scored.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let negatives = sorted.iter().filter(|(_, n)| *n).count();
    let mut points = Vec::new();
    let (mut tp, mut fp) = (0, 0);
    let mut i = 0;
    while i < sorted.len() {
        let threshold = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == threshold {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let counts = BinaryCounts { tp, fp, fn_: negatives - tp, tn: sorted.len() - negatives - fp };
        points.push(CurvePoint {
            x: threshold,
            precision: counts.precision(),
            recall: counts.recall(),
            f1: counts.f1(),
            auc: None,
        });
    }
    points
}

/// Counts when predicting Negative for every score `>= threshold`.
pub fn counts_at_threshold(scored: &[(f64, bool)], threshold: f64) -> BinaryCounts {
    BinaryCounts::from_pairs(scored.iter().map(|&(s, n)| (n, s >= threshold)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinaryLabel {
    Negative,
    Other,
}

impl BinaryLabel {
    pub fn from_negative(negative: bool) -> Self {
        if negative {
            BinaryLabel::Negative
        } else {
            BinaryLabel::Other
        }
    }

    pub fn is_negative(self) -> bool {
        self == BinaryLabel::Negative
    }
}

impl From<LexiconLabel> for BinaryLabel {
    fn from(label: LexiconLabel) -> Self {
        BinaryLabel::from_negative(label == LexiconLabel::Negative)
    }
}

fn either(a: BinaryLabel, b: BinaryLabel) -> BinaryLabel {
    BinaryLabel::from_negative(a.is_negative() || b.is_negative())
}

/// OR-ensemble: Negative when either system says Negative.
pub fn ensemble_predict(ml: &Prediction, rule: BinaryLabel) -> BinaryLabel {
    either(BinaryLabel::from_negative(ml.is_negative()), rule)
}

/// `table[a][b]` with index 0 for Other and 1 for Negative.
pub type AgreementTable = [[usize; 2]; 2];

pub fn system_agreement_table(a: &[BinaryLabel], b: &[BinaryLabel]) -> Result<AgreementTable> {
    if a.len() != b.len() {
        return Err(Error::InvalidParameter(format!(
            "prediction lists differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let mut table = [[0; 2]; 2];
    for (x, y) in a.iter().zip(b) {
        table[x.is_negative() as usize][y.is_negative() as usize] += 1;
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub flagged: usize,
}

impl From<BinaryCounts> for SystemMetrics {
    fn from(c: BinaryCounts) -> Self {
        SystemMetrics {
            precision: c.precision(),
            recall: c.recall(),
            f1: c.f1(),
            flagged: c.tp + c.fp,
        }
    }
}

/// Learner, rule-based system and their OR-ensemble on the same messages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub ml: SystemMetrics,
    pub rule: SystemMetrics,
    pub ensemble: SystemMetrics,
    /// Rows: rule system, columns: learner.
    pub agreement: AgreementTable,
}

/// Combine two pooled cross-validation runs over the same strict set.
pub fn ensemble_report(ml: &CvOutcome, rule: &CvOutcome) -> Result<EnsembleReport> {
    if ml.predictions.len() != rule.predictions.len()
        || ml.predictions.iter().zip(&rule.predictions).any(|(a, b)| a.tweet_id != b.tweet_id)
    {
        return Err(Error::InvalidParameter(
            "ensemble inputs must cover the same messages in the same order".into(),
        ));
    }
    let gold: Vec<bool> = ml.predictions.iter().map(|p| p.gold_negative()).collect();
    let ml_labels: Vec<BinaryLabel> =
        ml.predictions.iter().map(|p| BinaryLabel::from_negative(p.predicted_negative())).collect();
    let rule_labels: Vec<BinaryLabel> =
        rule.predictions.iter().map(|p| BinaryLabel::from_negative(p.predicted_negative())).collect();
    let combined: Vec<BinaryLabel> = ml_labels.iter().zip(&rule_labels).map(|(a, b)| either(*a, *b)).collect();
    let metrics = |labels: &[BinaryLabel]| {
        SystemMetrics::from(BinaryCounts::from_pairs(gold.iter().zip(labels).map(|(g, l)| (*g, l.is_negative()))))
    };
    Ok(EnsembleReport {
        ml: metrics(&ml_labels),
        rule: metrics(&rule_labels),
        ensemble: metrics(&combined),
        agreement: system_agreement_table(&rule_labels, &ml_labels)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sweep_endpoints() {
        let scored = [(0.9, true), (0.7, false), (0.4, true), (0.1, false)];
        let points = threshold_sweep(&scored);
        assert_eq!(points.len(), 4);
        assert_eq!(points[0].x, 0.9);
        let last = points.last().unwrap();
        assert_eq!((last.recall, last.precision), (1.0, 0.5));
        assert_eq!(counts_at_threshold(&scored, 1.0).recall(), 0.0);
    }

    #[test]
    fn ensemble_rules() {
        let pred = |label: &str| Prediction {
            label: label.into(),
            classes: vec!["Negative".into(), "Other".into()],
            scores: vec![0.0, 0.0],
            pseudo_prob: vec![0.5, 0.5],
        };
        assert_eq!(ensemble_predict(&pred("Negative"), BinaryLabel::Other), BinaryLabel::Negative);
        assert_eq!(ensemble_predict(&pred("Other"), BinaryLabel::Other), BinaryLabel::Other);
        assert_eq!(ensemble_predict(&pred("Negative"), BinaryLabel::Negative), BinaryLabel::Negative);
        assert_eq!(ensemble_predict(&pred("Other"), LexiconLabel::Negative.into()), BinaryLabel::Negative);
    }

    #[test]
    fn agreement_table_cells() {
        use BinaryLabel::*;
        let a = [Negative, Other, Other, Negative];
        assert_eq!(system_agreement_table(&a, &a).unwrap(), [[2, 0], [0, 2]]);
        let b = [Other, Negative, Negative, Other];
        let t = system_agreement_table(&a, &b).unwrap();
        assert_eq!(t[1][1], 0);
        assert_eq!(t.iter().flatten().sum::<usize>(), 4);
        assert!(system_agreement_table(&a, &b[..3]).is_err());
    }

    proptest! {
        #[test]
        fn sweep_recall_is_monotone(scored in prop::collection::vec((0u8..20, any::<bool>()), 1..200)) {
            let scored: Vec<(f64, bool)> = scored.into_iter().map(|(s, n)| (s as f64 / 20.0, n)).collect();
            let points = threshold_sweep(&scored);
            for w in points.windows(2) {
                prop_assert!(w[0].x > w[1].x);
                prop_assert!(w[1].recall >= w[0].recall);
            }
            for p in &points {
                let c = counts_at_threshold(&scored, p.x);
                prop_assert_eq!(p.recall, c.recall());
                prop_assert_eq!(p.precision, c.precision());
            }
        }
    }
}
