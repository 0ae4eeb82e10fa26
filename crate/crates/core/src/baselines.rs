//! Lexicon polarity baseline and random baselines.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Token;

/// Adjective polarities, with modifier+adjective bigrams treated as one adjective.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PolarityLexicon {
    unigrams: HashMap<String, f64>,
    bigrams: HashMap<(String, String), f64>,
}

impl PolarityLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, entry: &str, polarity: f64) -> Result<()> {
        if !(-1.0..=1.0).contains(&polarity) {
            return Err(Error::InvalidParameter(format!(
                "polarity {polarity} of {entry:?} outside [-1, 1]"
            )));
        }
        let words: Vec<String> = entry.split_whitespace().map(str::to_lowercase).collect();
        match words.as_slice() {
            [w] => {
                self.unigrams.insert(w.clone(), polarity);
            }
            [m, w] => {
                self.bigrams.insert((m.clone(), w.clone()), polarity);
            }
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "lexicon entry {entry:?} must be one or two words"
                )))
            }
        }
        Ok(())
    }

    /// Parse `word<TAB>polarity` / `word1 word2<TAB>polarity` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lexicon = PolarityLexicon::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (entry, value) = line.split_once('\t').ok_or_else(|| Error::Parse {
                line: line_no,
                message: "expected entry<TAB>polarity".into(),
            })?;
            let polarity: f64 = value.trim().parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("bad polarity {value:?}"),
            })?;
            lexicon.insert(entry, polarity).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
        }
        Ok(lexicon)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn len(&self) -> usize {
        self.unigrams.len() + self.bigrams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Product of matched adjective polarities, clamped to [-1, 1]; 0 when nothing matches.
pub fn lexicon_score(tokens: &[Token], lexicon: &PolarityLexicon) -> f64 {
    let mut product = 1.0;
    let mut matched = false;
    let mut i = 0;
    while i < tokens.len() {
        let word = tokens[i].surface.as_str();
        if let Some(next) = tokens.get(i + 1) {
            let key = (word.to_string(), next.surface.clone());
            if let Some(p) = lexicon.bigrams.get(&key) {
                product *= p;
                matched = true;
                i += 2;
                continue;
            }
        }
        if let Some(p) = lexicon.unigrams.get(word) {
            product *= p;
            matched = true;
        }
        i += 1;
    }
    if matched {
        product.clamp(-1.0, 1.0)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRule {
    pub negative_below: f64,
    pub positive_above: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LexiconLabel {
    Negative,
    Neutral,
    Positive,
}

pub fn lexicon_classify(score: f64, rule: &ThresholdRule) -> LexiconLabel {
    if score < rule.negative_below {
        LexiconLabel::Negative
    } else if score > rule.positive_above {
        LexiconLabel::Positive
    } else {
        LexiconLabel::Neutral
    }
}

/// F1 numerator/denominator pair `2tp / (2tp + fp + fn)`, compared exactly.
#[derive(Debug, Clone, Copy)]
struct F1Ratio {
    num: u64,
    den: u64,
}

impl F1Ratio {
    fn new(tp: usize, fp: usize, fn_: usize) -> Self {
        F1Ratio {
            num: 2 * tp as u64,
            den: (2 * tp + fp + fn_) as u64,
        }
    }

    fn value(self) -> f64 {
        if self.den == 0 {
            0.0
        } else {
            self.num as f64 / self.den as f64
        }
    }

    fn greater_than(self, other: F1Ratio) -> bool {
        // a/b > c/d with zero denominators treated as 0.
        let lhs = self.num as u128 * other.den.max(1) as u128;
        let rhs = other.num as u128 * self.den.max(1) as u128;
        lhs > rhs
    }
}

/// Candidate cuts: -inf, midpoints between adjacent distinct scores, +inf.
pub fn candidate_cuts(scores: &[f64]) -> Vec<f64> {
    let mut distinct: Vec<f64> = scores.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut cuts = Vec::with_capacity(distinct.len() + 1);
    cuts.push(f64::NEG_INFINITY);
    cuts.extend(distinct.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    cuts.push(f64::INFINITY);
    cuts
}

/// Negative-class F1 when predicting Negative for `score < cut`.
pub fn f1_at_cut(scored: &[(f64, bool)], cut: f64) -> f64 {
    let (tp, fp, fn_) = confusion_at_cut(scored, cut);
    F1Ratio::new(tp, fp, fn_).value()
}

fn confusion_at_cut(scored: &[(f64, bool)], cut: f64) -> (usize, usize, usize) {
    let mut tp = 0;
    let mut fp = 0;
    let mut fn_ = 0;
    for &(score, negative) in scored {
        match (score < cut, negative) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    (tp, fp, fn_)
}

/// Pick the Negative cut with the best F1 on training scores; ties go to the lower cut.
pub fn tune_threshold(scored: &[(f64, bool)]) -> Result<ThresholdRule> {
    let negatives = scored.iter().filter(|(_, n)| *n).count();
    if negatives == 0 || negatives == scored.len() {
        return Err(Error::Degenerate(
            "threshold tuning needs negative and non-negative instances".into(),
        ));
    }
    let mut sorted: Vec<(f64, bool)> = scored.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Sweep cuts upward; everything strictly below the cut is predicted Negative.
    let cuts = candidate_cuts(&sorted.iter().map(|s| s.0).collect::<Vec<_>>());
    let mut best_cut = cuts[0];
    let mut best = F1Ratio::new(0, 0, negatives);
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut next = 0;
    for &cut in &cuts[1..] {
        while next < sorted.len() && sorted[next].0 < cut {
            if sorted[next].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            next += 1;
        }
        let f1 = F1Ratio::new(tp, fp, negatives - tp);
        if f1.greater_than(best) {
            best = f1;
            best_cut = cut;
        }
    }
    Ok(ThresholdRule {
        negative_below: best_cut,
        positive_above: best_cut.max(0.0),
    })
}

/// Independent per-position coin flips with probability `p`.
pub fn random_baseline(n: usize, p: f64, seed: u64) -> Result<Vec<bool>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("probability {p} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| rng.gen_bool(p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::tokenize;
    use proptest::prelude::*;

    fn lexicon() -> PolarityLexicon {
        PolarityLexicon::parse("# demo\ngoed\t0.5\nslecht\t-0.7\nhorribly good\t0.9\ngood\t0.6\n").unwrap()
    }

    #[test]
    fn score_examples() {
        let lex = lexicon();
        assert_eq!(lexicon_score(&tokenize("dat is goed"), &lex), 0.5);
        assert_eq!(lexicon_score(&tokenize("geen bijvoeglijk naamwoord"), &lex), 0.0);
        assert_eq!(lexicon_score(&tokenize("horribly good"), &lex), 0.9);
        assert!((lexicon_score(&tokenize("goed maar slecht"), &lex) - (-0.35)).abs() < 1e-12);
        assert!((lexicon_score(&tokenize("slecht slecht"), &lex) - 0.49).abs() < 1e-12);
    }

    #[test]
    fn lexicon_parse_errors() {
        assert!(PolarityLexicon::parse("goed 0.5\n").is_err());
        assert!(PolarityLexicon::parse("goed\t1.5\n").is_err());
        assert!(PolarityLexicon::parse("a b c\t0.5\n").is_err());
        assert_eq!(lexicon().len(), 4);
    }

    #[test]
    fn classify_examples() {
        let rule = ThresholdRule { negative_below: -0.1, positive_above: 0.1 };
        assert_eq!(lexicon_classify(-0.5, &rule), LexiconLabel::Negative);
        assert_eq!(lexicon_classify(0.0, &rule), LexiconLabel::Neutral);
        assert_eq!(lexicon_classify(0.5, &rule), LexiconLabel::Positive);
    }

    #[test]
    fn tune_threshold_examples() {
        let rule = tune_threshold(&[(-0.9, true), (-0.8, true), (0.5, false)]).unwrap();
        assert!((rule.negative_below - -0.15).abs() < 1e-12);
        assert_eq!(rule.positive_above, 0.0);

        // Identical scores: only the infinite cuts remain; flagging everything wins.
        let rule = tune_threshold(&[(0.0, true), (0.0, false), (0.0, false)]).unwrap();
        assert_eq!(rule.negative_below, f64::INFINITY);

        let separable = [(-0.6, true), (-0.2, true), (0.1, false), (0.3, false)];
        let rule = tune_threshold(&separable).unwrap();
        assert_eq!(f1_at_cut(&separable, rule.negative_below), 1.0);

        assert!(tune_threshold(&[(0.1, false)]).is_err());
        assert!(tune_threshold(&[(0.1, true)]).is_err());
    }

    #[test]
    fn random_baseline_examples() {
        assert!(random_baseline(1000, 0.0, 1).unwrap().iter().all(|b| !b));
        assert!(random_baseline(1000, 1.0, 1).unwrap().iter().all(|b| *b));
        let draws = random_baseline(100_000, 0.15, 7).unwrap();
        let frac = draws.iter().filter(|b| **b).count() as f64 / draws.len() as f64;
        assert!((frac - 0.15).abs() < 0.005, "{frac}");
        assert_eq!(draws, random_baseline(100_000, 0.15, 7).unwrap());
        assert!(random_baseline(3, 1.5, 1).is_err());
    }

    proptest! {
        #[test]
        fn tuned_cut_beats_every_candidate(
            raw in prop::collection::vec((-10i32..10, any::<bool>()), 2..200),
        ) {
            let scored: Vec<(f64, bool)> = raw.iter().map(|&(s, n)| (s as f64 / 10.0, n)).collect();
            let negatives = scored.iter().filter(|s| s.1).count();
            prop_assume!(negatives > 0 && negatives < scored.len());
            let rule = tune_threshold(&scored).unwrap();
            let best = f1_at_cut(&scored, rule.negative_below);
            let scores: Vec<f64> = scored.iter().map(|s| s.0).collect();
            for cut in candidate_cuts(&scores) {
                let f = f1_at_cut(&scored, cut);
                prop_assert!(best >= f);
                if f == best {
                    prop_assert!(rule.negative_below <= cut);
                }
            }
            prop_assert!(rule.negative_below <= rule.positive_above);
        }

        #[test]
        fn unigram_scores_ignore_order(words in prop::collection::vec(
            prop::sample::select(vec!["goed", "slecht", "mooi", "vaccin", "eng"]), 0..8),
            rotate in 0usize..8,
        ) {
            let lex = PolarityLexicon::parse("goed\t0.5\nslecht\t-0.7\nmooi\t0.8\neng\t-0.4\n").unwrap();
            let a = lexicon_score(&tokenize(&words.join(" ")), &lex);
            let mut shuffled = words.clone();
            if !shuffled.is_empty() {
                let len = shuffled.len();
                shuffled.rotate_left(rotate % len);
            }
            let b = lexicon_score(&tokenize(&shuffled.join(" ")), &lex);
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
