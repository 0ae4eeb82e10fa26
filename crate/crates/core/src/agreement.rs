//! Inter-annotator agreement: percent agreement, Krippendorff's alpha (nominal)
//! and per-category mutual F-scores.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::annotation::AnnotationRecord;
use crate::error::{Error, Result};

/// Krippendorff's alpha, or `Undefined` when the expected disagreement is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Alpha {
    Value(f64),
    Undefined,
}

impl Alpha {
    pub fn value(self) -> Option<f64> {
        match self {
            Alpha::Value(v) => Some(v),
            Alpha::Undefined => None,
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Value(v) => write!(f, "{v:.2}"),
            Alpha::Undefined => f.write_str("undefined"),
        }
    }
}

/// Fraction of pairs whose two labels are equal.
pub fn percent_agreement<L: PartialEq>(pairs: &[(L, L)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("percent agreement needs at least one pair"));
    }
    let agree = pairs.iter().filter(|(a, b)| a == b).count();
    Ok(agree as f64 / pairs.len() as f64)
}

/// Nominal Krippendorff's alpha over units of labels.
///
/// Each unit lists the values assigned to it; missing values are simply absent.
/// Units with fewer than two values are not pairable and are skipped.
pub fn krippendorff_alpha<L: Ord>(units: &[Vec<L>]) -> Result<Alpha> {
    let mut index: BTreeMap<&L, usize> = BTreeMap::new();
    for unit in units.iter().filter(|u| u.len() >= 2) {
        for label in unit {
            let next = index.len();
            index.entry(label).or_insert(next);
        }
    }
    let k = index.len();
    if k == 0 {
        return Err(Error::EmptyInput("no unit has two or more values"));
    }

    // Coincidence matrix: o[c][k] = sum over units of (ordered pairs c,k) / (m_u - 1).
    let mut coincidence = vec![vec![0.0f64; k]; k];
    let mut counts = vec![0usize; k];
    for unit in units.iter().filter(|u| u.len() >= 2) {
        counts.iter_mut().for_each(|c| *c = 0);
        for label in unit {
            counts[index[label]] += 1;
        }
        let weight = 1.0 / (unit.len() - 1) as f64;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            for d in 0..k {
                let pairs = if c == d {
                    counts[c] * (counts[c] - 1)
                } else {
                    counts[c] * counts[d]
                };
                coincidence[c][d] += pairs as f64 * weight;
            }
        }
    }

    let marginals: Vec<f64> = coincidence.iter().map(|row| row.iter().sum()).collect();
    let n: f64 = marginals.iter().sum();
    let observed: f64 = (0..k)
        .flat_map(|c| (0..k).filter(move |&d| d != c).map(move |d| (c, d)))
        .map(|(c, d)| coincidence[c][d])
        .sum();
    let expected: f64 = (0..k)
        .flat_map(|c| (0..k).filter(move |&d| d != c).map(move |d| (c, d)))
        .map(|(c, d)| marginals[c] * marginals[d])
        .sum();
    if expected == 0.0 {
        return Ok(Alpha::Undefined);
    }
    let d_o = observed / n;
    let d_e = expected / (n * (n - 1.0));
    Ok(Alpha::Value(1.0 - d_o / d_e))
}

/// Per-category F1 between two annotators, each acting in turn as ground truth.
pub fn mutual_f_scores<L: Ord + Clone>(pairs: &[(L, L)]) -> Result<BTreeMap<L, f64>> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("mutual F-score needs at least one pair"));
    }
    // (both, first, second)
    let mut tallies: BTreeMap<L, (usize, usize, usize)> = BTreeMap::new();
    for (a, b) in pairs {
        tallies.entry(a.clone()).or_default().1 += 1;
        tallies.entry(b.clone()).or_default().2 += 1;
        if a == b {
            tallies.entry(a.clone()).or_default().0 += 1;
        }
    }
    Ok(tallies
        .into_iter()
        .map(|(label, (both, first, second))| {
            let denom = first + second;
            let f = if denom == 0 {
                0.0
            } else {
                2.0 * both as f64 / denom as f64
            };
            (label, f)
        })
        .collect())
}

/// One of the four annotated categorizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Categorization {
    Relevance,
    Subject,
    Stance,
    Sentiment,
}

impl Categorization {
    pub const ALL: [Categorization; 4] = [
        Categorization::Relevance,
        Categorization::Subject,
        Categorization::Stance,
        Categorization::Sentiment,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Categorization::Relevance => "Relevance",
            Categorization::Subject => "Subject",
            Categorization::Stance => "Stance",
            Categorization::Sentiment => "Sentiment",
        }
    }

    /// The record's value for this categorization; `None` is a missing value.
    pub fn value(self, record: &AnnotationRecord) -> Option<&'static str> {
        match self {
            Categorization::Relevance => Some(record.relevance.as_str()),
            Categorization::Subject => record.subject.map(|s| s.as_str()),
            Categorization::Stance => record.stance.map(|s| s.as_str()),
            Categorization::Sentiment => record.sentiment.map(|s| s.as_str()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub categorization: Categorization,
    pub percent_agreement: f64,
    pub alpha: Alpha,
    pub mutual_f: BTreeMap<String, f64>,
    pub n_units: usize,
}

/// Agreement for one categorization over all tweets with at least two values.
pub fn agreement_report(
    records: &[AnnotationRecord],
    categorization: Categorization,
) -> Result<AgreementReport> {
    let mut order: Vec<&str> = Vec::new();
    let mut units: HashMap<&str, Vec<&'static str>> = HashMap::new();
    for r in records {
        let entry = units.entry(r.tweet_id.as_str()).or_insert_with(|| {
            order.push(r.tweet_id.as_str());
            Vec::new()
        });
        if let Some(v) = categorization.value(r) {
            entry.push(v);
        }
    }
    let units: Vec<Vec<&'static str>> = order
        .into_iter()
        .map(|id| units.remove(id).unwrap_or_default())
        .filter(|u| u.len() >= 2)
        .collect();
    let pairs: Vec<(&str, &str)> = units
        .iter()
        .flat_map(|u| {
            (0..u.len()).flat_map(move |i| ((i + 1)..u.len()).map(move |j| (u[i], u[j])))
        })
        .collect();

    Ok(AgreementReport {
        categorization,
        percent_agreement: percent_agreement(&pairs)?,
        alpha: krippendorff_alpha(&units)?,
        mutual_f: mutual_f_scores(&pairs)?
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        n_units: units.len(),
    })
}

/// Render reports side by side, one column block per categorization.
pub fn render_table(reports: &[AgreementReport]) -> String {
    let mut out = String::new();
    out.push_str(&format!("{:<22}", ""));
    for r in reports {
        out.push_str(&format!(" | {:<28}", r.categorization.name()));
    }
    out.push('\n');
    out.push_str(&format!("{:<22}", "Percent agreement"));
    for r in reports {
        out.push_str(&format!(" | {:>28.2}", r.percent_agreement));
    }
    out.push('\n');
    out.push_str(&format!("{:<22}", "Krippendorff's alpha"));
    for r in reports {
        out.push_str(&format!(" | {:>28}", r.alpha.to_string()));
    }
    out.push('\n');
    out.push_str(&format!("{:<22}", "Units"));
    for r in reports {
        out.push_str(&format!(" | {:>28}", r.n_units));
    }
    out.push('\n');
    let rows = reports.iter().map(|r| r.mutual_f.len()).max().unwrap_or(0);
    for row in 0..rows {
        let title = if row == 0 { "Mutual F-score" } else { "" };
        out.push_str(&format!("{title:<22}"));
        for r in reports {
            match r.mutual_f.iter().nth(row) {
                Some((label, f)) => out.push_str(&format!(" | {label:<22} {f:>5.2}")),
                None => out.push_str(&format!(" | {:<28}", "")),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::{Relevance, Stance};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn percent_agreement_examples() {
        assert_eq!(percent_agreement(&[("A", "A"), ("A", "B")]).unwrap(), 0.5);
        assert_eq!(percent_agreement(&[("A", "A"), ("B", "B")]).unwrap(), 1.0);
        assert_eq!(percent_agreement(&[("A", "B"), ("B", "A")]).unwrap(), 0.0);
        assert!(percent_agreement::<&str>(&[]).is_err());
    }

    #[test]
    fn alpha_perfect_and_degenerate() {
        let units = vec![vec!["A", "A"], vec!["B", "B"], vec!["A", "A", "A"]];
        assert_eq!(krippendorff_alpha(&units).unwrap(), Alpha::Value(1.0));
        let units = vec![vec!["A", "A"], vec!["A", "A"]];
        assert_eq!(krippendorff_alpha(&units).unwrap(), Alpha::Undefined);
        let units: Vec<Vec<&str>> = vec![vec!["A"], vec![]];
        assert!(krippendorff_alpha(&units).is_err());
    }

    #[test]
    fn alpha_small_example() {
        // Pairable values: A,B | A,A | B,B -> n = 6, o_AB = o_BA = 1, n_A = n_B = 3.
        // D_o = 2/6, D_e = 18/30, alpha = 1 - (1/3)/(3/5) = 4/9.
        let units = vec![vec!["A", "B"], vec!["A", "A"], vec!["B", "B"]];
        let alpha = krippendorff_alpha(&units).unwrap().value().unwrap();
        assert!((alpha - 4.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn mutual_f_examples() {
        let f = mutual_f_scores(&[("A", "A")]).unwrap();
        assert_eq!(f["A"], 1.0);
        let f = mutual_f_scores(&[("A", "B")]).unwrap();
        assert_eq!((f["A"], f["B"]), (0.0, 0.0));
        let f = mutual_f_scores(&[("A", "A"), ("A", "B"), ("B", "B")]).unwrap();
        assert!((f["A"] - 2.0 / 3.0).abs() < 1e-12);
        assert!((f["B"] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn report_treats_absent_values_as_missing() {
        let records = vec![
            AnnotationRecord::relevant("1", "a", Stance::Negative, None),
            AnnotationRecord::relevant("1", "b", Stance::Negative, None),
            AnnotationRecord::irrelevant("2", "a"),
            AnnotationRecord::relevant("2", "b", Stance::Positive, None),
            AnnotationRecord::relevant("3", "a", Stance::Positive, None),
            AnnotationRecord::relevant("3", "c", Stance::Neutral, None),
        ];
        let stance = agreement_report(&records, Categorization::Stance).unwrap();
        assert_eq!(stance.n_units, 2);
        assert_eq!(stance.percent_agreement, 0.5);
        let relevance = agreement_report(&records, Categorization::Relevance).unwrap();
        assert_eq!(relevance.n_units, 3);
        assert!(relevance.mutual_f.contains_key(Relevance::Irrelevant.as_str()));
        assert!(agreement_report(&records, Categorization::Subject).is_err());
        let table = render_table(&[relevance, stance]);
        assert!(table.contains("Krippendorff's alpha"));
    }

    #[test]
    fn random_labels_have_alpha_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let units: Vec<Vec<u8>> = (0..10_000)
            .map(|_| vec![rng.gen_range(0..3), rng.gen_range(0..3)])
            .collect();
        let alpha = krippendorff_alpha(&units).unwrap().value().unwrap();
        assert!(alpha.abs() < 0.05, "alpha = {alpha}");
    }

    proptest! {
        #[test]
        fn metrics_are_role_symmetric_and_order_free(
            pairs in prop::collection::vec((0u8..4, 0u8..4), 1..60),
            rotate in 0usize..60,
        ) {
            let swapped: Vec<(u8, u8)> = pairs.iter().map(|&(a, b)| (b, a)).collect();
            let mut rotated = pairs.clone();
            let len = rotated.len();
            rotated.rotate_left(rotate % len);

            prop_assert_eq!(percent_agreement(&pairs).unwrap(), percent_agreement(&swapped).unwrap());
            prop_assert_eq!(mutual_f_scores(&pairs).unwrap(), mutual_f_scores(&swapped).unwrap());

            let units = |p: &[(u8, u8)]| p.iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>();
            let base = krippendorff_alpha(&units(&pairs)).unwrap();
            for other in [krippendorff_alpha(&units(&swapped)).unwrap(), krippendorff_alpha(&units(&rotated)).unwrap()] {
                match (base, other) {
                    (Alpha::Value(a), Alpha::Value(b)) => prop_assert!((a - b).abs() < 1e-12),
                    (a, b) => prop_assert_eq!(a, b),
                }
            }
            if let Alpha::Value(a) = base {
                prop_assert!(a <= 1.0 + 1e-12);
            }
            for f in mutual_f_scores(&pairs).unwrap().values() {
                prop_assert!((0.0..=1.0).contains(f));
            }
        }
    }
}
