//! Glue between labeled data and trained model artifacts.

use serde::{Deserialize, Serialize};

use crate::annotation::{LabeledInstance, LabelingScheme};
use crate::error::{Error, Result};
use crate::features::{tokenize, vectorize, Token, Vocabulary, DEFAULT_VOCABULARY_SIZE};
use crate::models::{Algorithm, Classifier, ModelArtifact, ModelConfig, TrainingSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub vocabulary_size: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelConfig::default(),
            vocabulary_size: DEFAULT_VOCABULARY_SIZE,
        }
    }
}

impl ExperimentConfig {
    pub fn with_seed(seed: u64) -> Self {
        ExperimentConfig {
            model: ModelConfig::with_seed(seed),
            ..ExperimentConfig::default()
        }
    }
}

/// Build a vocabulary from the training documents and fit a classifier on them.
///
/// Classes follow the scheme's priority order, restricted to labels present in
/// the training data.
pub fn fit_tokens(
    scheme: LabelingScheme,
    items: &[(&[Token], &str)],
    algorithm: Algorithm,
    config: &ExperimentConfig,
) -> Result<ModelArtifact> {
    if items.is_empty() {
        return Err(Error::EmptyInput("no training instances"));
    }
    for (_, label) in items {
        if !scheme.contains(label) {
            return Err(Error::InvalidRecord(format!(
                "label {label:?} is not part of scheme {scheme}"
            )));
        }
    }
    let docs: Vec<&[Token]> = items.iter().map(|(t, _)| *t).collect();
    let vocabulary = Vocabulary::build(&docs, config.vocabulary_size);
    let classes: Vec<&str> = scheme
        .priority()
        .iter()
        .copied()
        .filter(|c| items.iter().any(|(_, l)| l == c))
        .collect();
    let data = TrainingSet::with_classes(
        vocabulary.len(),
        &classes,
        items
            .iter()
            .map(|(tokens, label)| (vectorize(tokens, &vocabulary), *label)),
    )?;
    let classifier = Classifier::train(algorithm, &data, &config.model)?;
    Ok(ModelArtifact {
        scheme,
        vocabulary,
        classifier,
    })
}

/// Tokenize and train on labeled instances.
pub fn train_artifact(
    scheme: LabelingScheme,
    instances: &[LabeledInstance],
    algorithm: Algorithm,
    config: &ExperimentConfig,
) -> Result<ModelArtifact> {
    let tokens: Vec<Vec<Token>> = instances.iter().map(|i| tokenize(&i.text)).collect();
    let items: Vec<(&[Token], &str)> = tokens
        .iter()
        .zip(instances)
        .map(|(t, i)| (t.as_slice(), i.label.as_str()))
        .collect();
    fit_tokens(scheme, &items, algorithm, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::Reliability;

    fn inst(id: &str, text: &str, label: &str) -> LabeledInstance {
        LabeledInstance {
            tweet_id: id.into(),
            text: text.into(),
            label: label.into(),
            reliability: Reliability::Strict,
        }
    }

    #[test]
    fn trains_in_priority_order() {
        let data = vec![
            inst("1", "vaccins zijn gif", "Other"),
            inst("2", "vaccins zijn gevaarlijk gif", "Negative"),
            inst("3", "prik gehaald", "Other"),
        ];
        for algorithm in Algorithm::ALL {
            let artifact =
                train_artifact(LabelingScheme::Binary, &data, algorithm, &ExperimentConfig::default()).unwrap();
            assert_eq!(artifact.classifier.classes(), ["Negative", "Other"]);
            assert_eq!(artifact.vocabulary.len(), artifact.classifier.n_features());
        }
    }

    #[test]
    fn rejects_foreign_labels() {
        let data = vec![inst("1", "x", "Positive")];
        assert!(train_artifact(LabelingScheme::Binary, &data, Algorithm::Mnb, &ExperimentConfig::default()).is_err());
        assert!(train_artifact(LabelingScheme::Binary, &[], Algorithm::Mnb, &ExperimentConfig::default()).is_err());
    }
}
