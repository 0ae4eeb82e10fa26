use serde::{Deserialize, Serialize};

use super::{Prediction, TrainingSet};
use crate::error::{Error, Result};
use crate::features::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MnbConfig {
    /// Additive smoothing.
    pub alpha: f64,
    /// When false the class prior is uniform.
    pub fit_prior: bool,
    /// Replaces zero feature probabilities before taking logs.
    pub floor: f64,
}

impl Default for MnbConfig {
    fn default() -> Self {
        MnbConfig {
            alpha: 0.0,
            fit_prior: false,
            floor: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnbModel {
    pub classes: Vec<String>,
    pub log_prior: Vec<f64>,
    /// `log_likelihood[class][feature]`.
    pub log_likelihood: Vec<Vec<f64>>,
    pub smoothing_alpha: f64,
    pub floor: f64,
}

/// Fit per-class feature distributions `(count + alpha) / (total + alpha * V)`.
pub fn train_mnb(data: &TrainingSet, config: &MnbConfig) -> Result<MnbModel> {
    if data.is_empty() {
        return Err(Error::EmptyInput("naive Bayes needs training data"));
    }
    if config.alpha.is_nan() || config.alpha < 0.0 || config.floor.is_nan() || config.floor <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "naive Bayes needs alpha >= 0 and floor > 0, got alpha={} floor={}",
            config.alpha, config.floor
        )));
    }
    let class_counts = data.class_counts();
    if let Some(empty) = class_counts.iter().position(|&n| n == 0) {
        return Err(Error::Degenerate(format!(
            "class {:?} has no training instances",
            data.classes[empty]
        )));
    }

    let k = data.classes.len();
    let v = data.n_features;
    let mut counts = vec![vec![0.0f64; v]; k];
    for (vec, class) in &data.examples {
        for &f in vec.indices() {
            counts[*class][f] += 1.0;
        }
    }

    let log_likelihood = counts
        .into_iter()
        .map(|row| {
            let total: f64 = row.iter().sum();
            let denom = total + config.alpha * v as f64;
            row.into_iter()
                .map(|count| {
                    let p = if denom > 0.0 { (count + config.alpha) / denom } else { 0.0 };
                    p.max(config.floor).ln()
                })
                .collect()
        })
        .collect();

    let n = data.len() as f64;
    let log_prior = if config.fit_prior {
        class_counts.iter().map(|&c| (c as f64 / n).ln()).collect()
    } else {
        vec![-(k as f64).ln(); k]
    };

    Ok(MnbModel {
        classes: data.classes.clone(),
        log_prior,
        log_likelihood,
        smoothing_alpha: config.alpha,
        floor: config.floor,
    })
}

impl MnbModel {
    pub fn n_features(&self) -> usize {
        self.log_likelihood.first().map_or(0, Vec::len)
    }

    /// Unnormalized log-posterior per class.
    pub fn scores(&self, vec: &FeatureVector) -> Result<Vec<f64>> {
        vec.check_bounds(self.n_features())?;
        Ok(self
            .log_prior
            .iter()
            .zip(&self.log_likelihood)
            .map(|(prior, ll)| prior + vec.indices().iter().map(|&f| ll[f]).sum::<f64>())
            .collect())
    }

    pub fn predict(&self, vec: &FeatureVector) -> Result<Prediction> {
        Ok(Prediction::from_scores(&self.classes, self.scores(vec)?))
    }
}
