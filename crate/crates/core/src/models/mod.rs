//! Multinomial naive Bayes and one-vs-rest linear SVM over binary feature vectors.

mod artifact;
mod mnb;
mod svm;

pub use artifact::{load_model, save_model, ModelArtifact, FORMAT_VERSION, MAGIC};
pub use mnb::{train_mnb, MnbConfig, MnbModel};
pub use svm::{balanced_weights, train_svm, train_svm_traced, SvmConfig, SvmModel, SvmTrace};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::annotation::NEGATIVE;
use crate::error::{Error, Result};
use crate::features::FeatureVector;

/// Labeled feature vectors with a fixed class order.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub n_features: usize,
    pub classes: Vec<String>,
    /// Feature vector and index into `classes`.
    pub examples: Vec<(FeatureVector, usize)>,
}

impl TrainingSet {
    /// Classes follow `class_order`; every label must appear in it. Classes
    /// without examples are kept, so callers decide whether that is an error.
    pub fn with_classes<S: AsRef<str>>(
        n_features: usize,
        class_order: &[S],
        examples: impl IntoIterator<Item = (FeatureVector, S)>,
    ) -> Result<Self> {
        let classes: Vec<String> = class_order.iter().map(|c| c.as_ref().to_string()).collect();
        let mut out = Vec::new();
        for (vec, label) in examples {
            vec.check_bounds(n_features)?;
            let idx = classes
                .iter()
                .position(|c| c == label.as_ref())
                .ok_or_else(|| Error::InvalidRecord(format!("label {:?} not in class list", label.as_ref())))?;
            out.push((vec, idx));
        }
        Ok(TrainingSet {
            n_features,
            classes,
            examples: out,
        })
    }

    /// Classes are the distinct labels in ascending order.
    pub fn new<S: AsRef<str>>(
        n_features: usize,
        examples: impl IntoIterator<Item = (FeatureVector, S)>,
    ) -> Result<Self> {
        let examples: Vec<(FeatureVector, S)> = examples.into_iter().collect();
        let mut classes: Vec<String> = examples.iter().map(|(_, l)| l.as_ref().to_string()).collect();
        classes.sort();
        classes.dedup();
        TrainingSet::with_classes(n_features, &classes, examples.into_iter().map(|(v, l)| (v, l.as_ref().to_string())))
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        for (_, c) in &self.examples {
            counts[*c] += 1;
        }
        counts
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

/// Classifier output for one message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: String,
    pub classes: Vec<String>,
    /// Log-posterior (naive Bayes) or decision value (SVM), per class.
    pub scores: Vec<f64>,
    pub pseudo_prob: Vec<f64>,
}

impl Prediction {
    pub(crate) fn from_scores(classes: &[String], scores: Vec<f64>) -> Self {
        let best = argmax(&scores);
        Prediction {
            label: classes[best].clone(),
            classes: classes.to_vec(),
            pseudo_prob: softmax(&scores),
            scores,
        }
    }

    pub fn prob_of(&self, class: &str) -> f64 {
        self.classes
            .iter()
            .position(|c| c == class)
            .map_or(0.0, |i| self.pseudo_prob[i])
    }

    /// Pseudo-probability of the Negative class; 0 when the model has no such class.
    pub fn negative_score(&self) -> f64 {
        self.prob_of(NEGATIVE)
    }

    pub fn is_negative(&self) -> bool {
        self.label == NEGATIVE
    }
}

/// Index of the first maximum.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    Mnb,
    Svm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 2] = [Algorithm::Mnb, Algorithm::Svm];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Mnb => "MNB",
            Algorithm::Svm => "SVM",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mnb" | "nb" | "naive-bayes" => Ok(Algorithm::Mnb),
            "svm" => Ok(Algorithm::Svm),
            _ => Err(Error::InvalidParameter(format!("unknown algorithm {s:?}"))),
        }
    }
}

/// Hyperparameters for both learners; each learner reads its own part.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub mnb: MnbConfig,
    pub svm: SvmConfig,
}

impl ModelConfig {
    pub fn with_seed(seed: u64) -> Self {
        ModelConfig {
            svm: SvmConfig {
                seed,
                ..SvmConfig::default()
            },
            ..ModelConfig::default()
        }
    }
}

/// A trained model of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    Mnb(MnbModel),
    Svm(SvmModel),
}

impl Classifier {
    pub fn train(algorithm: Algorithm, data: &TrainingSet, config: &ModelConfig) -> Result<Self> {
        match algorithm {
            Algorithm::Mnb => train_mnb(data, &config.mnb).map(Classifier::Mnb),
            Algorithm::Svm => train_svm(data, &config.svm).map(Classifier::Svm),
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            Classifier::Mnb(_) => Algorithm::Mnb,
            Classifier::Svm(_) => Algorithm::Svm,
        }
    }

    pub fn classes(&self) -> &[String] {
        match self {
            Classifier::Mnb(m) => &m.classes,
            Classifier::Svm(m) => &m.classes,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Classifier::Mnb(m) => m.n_features(),
            Classifier::Svm(m) => m.n_features(),
        }
    }

    pub fn predict(&self, vec: &FeatureVector) -> Result<Prediction> {
        match self {
            Classifier::Mnb(m) => m.predict(vec),
            Classifier::Svm(m) => m.predict(vec),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_closed_form() {
        let p = softmax(&[2.0, 0.0]);
        let e2 = 2.0f64.exp();
        assert!((p[0] - e2 / (e2 + 1.0)).abs() < 1e-12);
        assert!((p[0] - 0.881).abs() < 1e-3 && (p[1] - 0.119).abs() < 1e-3);
        let p = softmax(&[-1000.0, -1001.0, 5.0]);
        assert!(p.iter().all(|x| x.is_finite()) && p[2] > 0.999);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn argmax_ties_follow_class_order() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[0.0, 0.0]), 0);
    }

    #[test]
    fn training_set_validates_labels_and_bounds() {
        let fv = |v: Vec<usize>| FeatureVector::new(v);
        assert!(TrainingSet::with_classes(2, &["A"], [(fv(vec![0]), "B")]).is_err());
        assert!(matches!(
            TrainingSet::with_classes(2, &["A"], [(fv(vec![5]), "A")]),
            Err(Error::FeatureOutOfRange { index: 5, size: 2 })
        ));
        let set = TrainingSet::new(2, [(fv(vec![0]), "B"), (fv(vec![1]), "A")]).unwrap();
        assert_eq!(set.classes, ["A", "B"]);
        assert_eq!(set.class_counts(), [1, 1]);
    }
}
