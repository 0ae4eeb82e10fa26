//! One-vs-rest L2-regularized hinge-loss SVM trained by dual coordinate descent.
//!
//! Each binary subproblem minimizes the dual
//! `f(a) = 1/2 |w(a)|^2 - sum(a)` with `w(a) = sum_i a_i y_i x_i` and box
//! constraints `0 <= a_i <= C_i`. The bias is learned as the weight of an
//! implicit constant feature equal to 1.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Prediction, TrainingSet};
use crate::error::{Error, Result};
use crate::features::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub c: f64,
    /// Stop when the largest projected-gradient violation of an epoch is below this.
    pub tolerance: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            tolerance: 1e-3,
            max_epochs: 1_000,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub classes: Vec<String>,
    /// `weights[class][feature]`.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub c: f64,
}

/// Solver diagnostics, one entry per one-vs-rest subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmTrace {
    /// Dual objective after each epoch.
    pub objective: Vec<Vec<f64>>,
    pub dual: Vec<Vec<f64>>,
    /// Per-instance upper bound `C_i` of the dual box.
    pub upper_bounds: Vec<Vec<f64>>,
    pub converged: Vec<bool>,
}

/// Balanced class weights `n / (k * n_c)` for class counts `n_c`.
pub fn balanced_weights(counts: &[usize]) -> Vec<f64> {
    let n: usize = counts.iter().sum();
    let k = counts.len() as f64;
    counts
        .iter()
        .map(|&c| if c == 0 { 0.0 } else { n as f64 / (k * c as f64) })
        .collect()
}

struct Subproblem {
    weights: Vec<f64>,
    bias: f64,
    objective: Vec<f64>,
    dual: Vec<f64>,
    upper: Vec<f64>,
    converged: bool,
}

fn dot(w: &[f64], bias: f64, x: &FeatureVector) -> f64 {
    x.indices().iter().map(|&f| w[f]).sum::<f64>() + bias
}

fn dual_objective(w: &[f64], bias: f64, dual: &[f64]) -> f64 {
    let norm: f64 = w.iter().map(|v| v * v).sum::<f64>() + bias * bias;
    0.5 * norm - dual.iter().sum::<f64>()
}

fn solve_binary(data: &TrainingSet, positive: usize, config: &SvmConfig, seed: u64) -> Subproblem {
    let n = data.len();
    let y: Vec<f64> = data
        .examples
        .iter()
        .map(|(_, c)| if *c == positive { 1.0 } else { -1.0 })
        .collect();
    let n_pos = y.iter().filter(|v| **v > 0.0).count();
    let class_weight = balanced_weights(&[n_pos, n - n_pos]);
    let upper: Vec<f64> = y
        .iter()
        .map(|v| config.c * if *v > 0.0 { class_weight[0] } else { class_weight[1] })
        .collect();
    // Diagonal of Q: |x_i|^2 plus the constant bias feature.
    let q_diag: Vec<f64> = data.examples.iter().map(|(x, _)| x.len() as f64 + 1.0).collect();

    let mut w = vec![0.0; data.n_features];
    let mut bias = 0.0;
    let mut dual = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut objective = Vec::new();
    let mut converged = false;

    for _ in 0..config.max_epochs {
        order.shuffle(&mut rng);
        let mut max_violation = 0.0f64;
        for &i in &order {
            let x = &data.examples[i].0;
            let g = y[i] * dot(&w, bias, x) - 1.0;
            let pg = if dual[i] <= 0.0 {
                g.min(0.0)
            } else if dual[i] >= upper[i] {
                g.max(0.0)
            } else {
                g
            };
            max_violation = max_violation.max(pg.abs());
            if pg.abs() > 1e-12 {
                let old = dual[i];
                dual[i] = (old - g / q_diag[i]).clamp(0.0, upper[i]);
                let step = (dual[i] - old) * y[i];
                if step != 0.0 {
                    for &f in x.indices() {
                        w[f] += step;
                    }
                    bias += step;
                }
            }
        }
        objective.push(dual_objective(&w, bias, &dual));
        if max_violation < config.tolerance {
            converged = true;
            break;
        }
    }

    Subproblem {
        weights: w,
        bias,
        objective,
        dual,
        upper,
        converged,
    }
}

/// Train and also return solver diagnostics.
pub fn train_svm_traced(data: &TrainingSet, config: &SvmConfig) -> Result<(SvmModel, SvmTrace)> {
    if data.is_empty() {
        return Err(Error::EmptyInput("SVM needs training data"));
    }
    if config.c <= 0.0 || !config.c.is_finite() {
        return Err(Error::InvalidParameter(format!("SVM needs C > 0, got {}", config.c)));
    }
    let present = data.class_counts().iter().filter(|&&n| n > 0).count();
    if present < 2 {
        return Err(Error::Degenerate("SVM needs at least two classes".into()));
    }

    let mut model = SvmModel {
        classes: data.classes.clone(),
        weights: Vec::with_capacity(data.classes.len()),
        bias: Vec::with_capacity(data.classes.len()),
        c: config.c,
    };
    let mut trace = SvmTrace {
        objective: Vec::new(),
        dual: Vec::new(),
        upper_bounds: Vec::new(),
        converged: Vec::new(),
    };
    for class in 0..data.classes.len() {
        let seed = config.seed.wrapping_add(class as u64);
        let sub = solve_binary(data, class, config, seed);
        model.weights.push(sub.weights);
        model.bias.push(sub.bias);
        trace.objective.push(sub.objective);
        trace.dual.push(sub.dual);
        trace.upper_bounds.push(sub.upper);
        trace.converged.push(sub.converged);
    }
    if trace.converged.iter().any(|c| !c) {
        log::warn!("SVM stopped at {} epochs before reaching tolerance", config.max_epochs);
    }
    Ok((model, trace))
}

pub fn train_svm(data: &TrainingSet, config: &SvmConfig) -> Result<SvmModel> {
    train_svm_traced(data, config).map(|(model, _)| model)
}

impl SvmModel {
    pub fn n_features(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn decision_values(&self, vec: &FeatureVector) -> Result<Vec<f64>> {
        vec.check_bounds(self.n_features())?;
        Ok(self
            .weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| dot(w, *b, vec))
            .collect())
    }

    pub fn predict(&self, vec: &FeatureVector) -> Result<Prediction> {
        Ok(Prediction::from_scores(&self.classes, self.decision_values(vec)?))
    }
}
