use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{compute_auc, make_folds, BinaryCounts, ConfusionMatrix, CurvePoint, EvalReport, FoldPlan};
use crate::annotation::{LabeledDataset, LabeledInstance, LabelingScheme, TrainingVariant, NEGATIVE, OTHER};
use crate::baselines::{lexicon_classify, lexicon_score, random_baseline, tune_threshold, LexiconLabel, PolarityLexicon};
use crate::error::{Error, Result};
use crate::features::{tokenize, vectorize, Token};
use crate::models::Algorithm;
use crate::pipeline::{fit_tokens, ExperimentConfig};

/// One pooled test prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPrediction {
    pub tweet_id: String,
    pub gold: String,
    pub predicted: String,
    /// Ranking score for the Negative class; higher means more negative.
    pub negative_score: f64,
    pub fold: usize,
}

impl ScoredPrediction {
    pub fn gold_negative(&self) -> bool {
        self.gold == NEGATIVE
    }

    pub fn predicted_negative(&self) -> bool {
        self.predicted == NEGATIVE
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub report: EvalReport,
    /// In strict-set order.
    pub predictions: Vec<ScoredPrediction>,
}

/// A grid cell: one labeling, training variant and learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub scheme: LabelingScheme,
    pub variant: TrainingVariant,
    pub algorithm: Algorithm,
    pub report: EvalReport,
}

/// Non-learning reference systems evaluated on the same folds.
#[derive(Debug, Clone, Copy)]
pub enum BaselineKind<'a> {
    /// Negative cut tuned on each fold's strict training part.
    Lexicon(&'a PolarityLexicon),
    /// Flag each message as Negative with probability `p`.
    Random { p: f64, seed: u64 },
}

fn check_plan(dataset: &LabeledDataset, plan: &FoldPlan) -> Result<()> {
    if plan.assignments.len() != dataset.strict.len() {
        return Err(Error::InvalidParameter(format!(
            "fold plan covers {} instances but the strict set has {}",
            plan.assignments.len(),
            dataset.strict.len()
        )));
    }
    for inst in &dataset.strict {
        match plan.fold_of(&inst.tweet_id) {
            Some(f) if f < plan.k => {}
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "strict instance {:?} has no fold",
                    inst.tweet_id
                )))
            }
        }
    }
    Ok(())
}

fn check_scheme(dataset: &LabeledDataset, scheme: LabelingScheme) -> Result<()> {
    if dataset.scheme != scheme {
        return Err(Error::SchemeMismatch {
            dataset: dataset.scheme.name(),
            requested: scheme.name(),
        });
    }
    Ok(())
}

fn tokenize_all(instances: &[LabeledInstance]) -> Vec<Vec<Token>> {
    instances.par_iter().map(|i| tokenize(&i.text)).collect()
}

/// Pool predictions into a Negative-vs-rest report.
pub fn pooled_report(
    gold_labels: &[&str],
    predicted_labels: &[&str],
    predictions: &[ScoredPrediction],
) -> Result<EvalReport> {
    let mut confusion = ConfusionMatrix::new(gold_labels, predicted_labels);
    for p in predictions {
        confusion.add(&p.gold, &p.predicted)?;
    }
    let counts = BinaryCounts::from_pairs(predictions.iter().map(|p| (p.gold_negative(), p.predicted_negative())));
    let scored: Vec<(f64, bool)> = predictions.iter().map(|p| (p.negative_score, p.gold_negative())).collect();
    Ok(EvalReport {
        precision: counts.precision(),
        recall: counts.recall(),
        f1: counts.f1(),
        auc: compute_auc(&scored)?,
        confusion,
        n_test: predictions.len(),
    })
}

/// Train on every fold's complement and pool the test predictions.
pub fn cross_validate(
    dataset: &LabeledDataset,
    variant: TrainingVariant,
    scheme: LabelingScheme,
    algorithm: Algorithm,
    plan: &FoldPlan,
    config: &ExperimentConfig,
) -> Result<EvalReport> {
    cross_validate_detailed(dataset, variant, scheme, algorithm, plan, config).map(|o| o.report)
}

pub fn cross_validate_detailed(
    dataset: &LabeledDataset,
    variant: TrainingVariant,
    scheme: LabelingScheme,
    algorithm: Algorithm,
    plan: &FoldPlan,
    config: &ExperimentConfig,
) -> Result<CvOutcome> {
    let inputs = CvInputs::new(dataset, variant, scheme, plan)?;
    let predictions = inputs.run(algorithm, config, &|_, _| true)?;
    let report = pooled_report(scheme.priority(), scheme.priority(), &predictions)?;
    Ok(CvOutcome { report, predictions })
}

/// Pre-tokenized material shared by every fold.
struct CvInputs<'a> {
    dataset: &'a LabeledDataset,
    scheme: LabelingScheme,
    plan: &'a FoldPlan,
    folds: Vec<usize>,
    strict_tokens: Vec<Vec<Token>>,
    /// Lax and one-annotator instances requested by the variant.
    extra: Vec<(&'a LabeledInstance, Vec<Token>)>,
}

impl<'a> CvInputs<'a> {
    fn new(
        dataset: &'a LabeledDataset,
        variant: TrainingVariant,
        scheme: LabelingScheme,
        plan: &'a FoldPlan,
    ) -> Result<Self> {
        check_scheme(dataset, scheme)?;
        check_plan(dataset, plan)?;
        let strict_ids: BTreeSet<&str> = dataset.strict.iter().map(|i| i.tweet_id.as_str()).collect();
        let mut extra_instances: Vec<&LabeledInstance> = Vec::new();
        for (wanted, tier, name) in [
            (variant.includes_lax(), &dataset.lax, "lax"),
            (variant.includes_one(), &dataset.one, "one-annotator"),
        ] {
            if !wanted {
                continue;
            }
            if tier.is_empty() {
                log::warn!("{variant} requested but the {name} tier is empty");
            }
            extra_instances.extend(tier.iter().filter(|i| !strict_ids.contains(i.tweet_id.as_str())));
        }
        let extra_tokens: Vec<Vec<Token>> = extra_instances.par_iter().map(|i| tokenize(&i.text)).collect();
        Ok(CvInputs {
            dataset,
            scheme,
            plan,
            folds: dataset
                .strict
                .iter()
                .map(|i| plan.fold_of(&i.tweet_id).expect("plan checked"))
                .collect(),
            strict_tokens: tokenize_all(&dataset.strict),
            extra: extra_instances.into_iter().zip(extra_tokens).collect(),
        })
    }

    /// `keep(fold, strict_index)` selects which strict training instances a fold uses.
    fn run(
        &self,
        algorithm: Algorithm,
        config: &ExperimentConfig,
        keep: &(dyn Fn(usize, usize) -> bool + Sync),
    ) -> Result<Vec<ScoredPrediction>> {
        let strict = &self.dataset.strict;
        let per_fold: Vec<Vec<(usize, ScoredPrediction)>> = (0..self.plan.k)
            .into_par_iter()
            .map(|fold| {
                let mut items: Vec<(&[Token], &str)> = Vec::new();
                for (i, inst) in strict.iter().enumerate() {
                    if self.folds[i] != fold && keep(fold, i) {
                        items.push((&self.strict_tokens[i], &inst.label));
                    }
                }
                for (inst, tokens) in &self.extra {
                    items.push((tokens, &inst.label));
                }
                let artifact = fit_tokens(self.scheme, &items, algorithm, config)?;
                let mut out = Vec::new();
                for (i, inst) in strict.iter().enumerate() {
                    if self.folds[i] != fold {
                        continue;
                    }
                    let vec = vectorize(&self.strict_tokens[i], &artifact.vocabulary);
                    let pred = artifact.classifier.predict(&vec)?;
                    out.push((
                        i,
                        ScoredPrediction {
                            tweet_id: inst.tweet_id.clone(),
                            gold: inst.label.clone(),
                            negative_score: pred.negative_score(),
                            predicted: pred.label,
                            fold,
                        },
                    ));
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        Ok(in_strict_order(per_fold, strict.len()))
    }
}

fn in_strict_order(per_fold: Vec<Vec<(usize, ScoredPrediction)>>, n: usize) -> Vec<ScoredPrediction> {
    let mut slots: Vec<Option<ScoredPrediction>> = vec![None; n];
    for (i, p) in per_fold.into_iter().flatten() {
        slots[i] = Some(p);
    }
    slots.into_iter().map(|p| p.expect("every strict instance is tested once")).collect()
}

/// Metrics as the strict training portion grows from `1/steps` to all of it.
///
/// Each fold draws a seeded random order over its strict training instances;
/// the sample at fraction `s/steps` is the first `ceil(s/steps * n)` of that
/// order, so samples are nested. Lax and one-annotator tiers are always added
/// in full. At the last step the training sets equal those of [`cross_validate`].
#[allow(clippy::too_many_arguments)]
pub fn learning_curve(
    dataset: &LabeledDataset,
    variant: TrainingVariant,
    scheme: LabelingScheme,
    algorithm: Algorithm,
    plan: &FoldPlan,
    steps: usize,
    seed: u64,
    config: &ExperimentConfig,
) -> Result<Vec<CurvePoint>> {
    if steps == 0 {
        return Err(Error::InvalidParameter("learning curve needs at least one step".into()));
    }
    let inputs = CvInputs::new(dataset, variant, scheme, plan)?;
    // rank[fold][strict_index]: position in that fold's sampling order.
    let ranks: Vec<Vec<usize>> = (0..plan.k)
        .map(|fold| {
            let mut train: Vec<usize> = (0..dataset.strict.len()).filter(|&i| inputs.folds[i] != fold).collect();
            train.shuffle(&mut ChaCha8Rng::seed_from_u64(seed.wrapping_add(fold as u64)));
            let mut rank = vec![usize::MAX; dataset.strict.len()];
            for (r, i) in train.into_iter().enumerate() {
                rank[i] = r;
            }
            rank
        })
        .collect();
    let train_sizes: Vec<usize> = (0..plan.k)
        .map(|fold| inputs.folds.iter().filter(|&&f| f != fold).count())
        .collect();

    let mut points = Vec::with_capacity(steps);
    for step in 1..=steps {
        let fraction = step as f64 / steps as f64;
        let keep = |fold: usize, i: usize| {
            let quota = (train_sizes[fold] * step).div_ceil(steps);
            ranks[fold][i] < quota
        };
        let predictions = inputs.run(algorithm, config, &keep)?;
        let report = pooled_report(scheme.priority(), scheme.priority(), &predictions)?;
        points.push(CurvePoint {
            x: fraction,
            precision: report.precision,
            recall: report.recall,
            f1: report.f1,
            auc: Some(report.auc),
        });
    }
    Ok(points)
}

/// Evaluate a baseline on the strict set with the same folds as the learners.
pub fn baseline_cv(dataset: &LabeledDataset, baseline: BaselineKind<'_>, plan: &FoldPlan) -> Result<CvOutcome> {
    check_plan(dataset, plan)?;
    let strict = &dataset.strict;
    let folds: Vec<usize> = strict
        .iter()
        .map(|i| plan.fold_of(&i.tweet_id).expect("plan checked"))
        .collect();
    let make = |i: usize, predicted: &str, negative_score: f64| ScoredPrediction {
        tweet_id: strict[i].tweet_id.clone(),
        gold: strict[i].label.clone(),
        predicted: predicted.to_string(),
        negative_score,
        fold: folds[i],
    };
    let (predicted_labels, predictions): (Vec<&str>, Vec<ScoredPrediction>) = match baseline {
        BaselineKind::Lexicon(lexicon) => {
            let scores: Vec<f64> = strict.iter().map(|i| lexicon_score(&tokenize(&i.text), lexicon)).collect();
            let mut predictions: Vec<Option<ScoredPrediction>> = vec![None; strict.len()];
            for fold in 0..plan.k {
                let train: Vec<(f64, bool)> = (0..strict.len())
                    .filter(|&i| folds[i] != fold)
                    .map(|i| (scores[i], strict[i].label == NEGATIVE))
                    .collect();
                let rule = tune_threshold(&train)?;
                for i in (0..strict.len()).filter(|&i| folds[i] == fold) {
                    let label = match lexicon_classify(scores[i], &rule) {
                        LexiconLabel::Negative => "Negative",
                        LexiconLabel::Neutral => "Neutral",
                        LexiconLabel::Positive => "Positive",
                    };
                    predictions[i] = Some(make(i, label, -scores[i]));
                }
            }
            (
                vec!["Negative", "Neutral", "Positive"],
                predictions.into_iter().map(|p| p.expect("all folds visited")).collect(),
            )
        }
        BaselineKind::Random { p, seed } => {
            let flags = random_baseline(strict.len(), p, seed)?;
            let predictions = flags
                .iter()
                .enumerate()
                .map(|(i, &neg)| make(i, if neg { NEGATIVE } else { OTHER }, if neg { 1.0 } else { 0.0 }))
                .collect();
            (vec![NEGATIVE, OTHER], predictions)
        }
    };
    let report = pooled_report(dataset.scheme.priority(), &predicted_labels, &predictions)?;
    Ok(CvOutcome { report, predictions })
}

/// All labeling x variant x learner cells, in that nesting order.
///
/// `datasets` holds one aggregated dataset per labeling scheme. Each scheme gets
/// its own fold plan from `seed`, shared by all of its cells.
pub fn run_grid(
    datasets: &[LabeledDataset],
    k: usize,
    seed: u64,
    config: &ExperimentConfig,
) -> Result<Vec<GridCell>> {
    let plans: Vec<FoldPlan> = datasets
        .iter()
        .map(|d| make_folds(&d.strict, k, seed))
        .collect::<Result<_>>()?;
    let mut cells = Vec::new();
    for (d, plan) in datasets.iter().zip(&plans) {
        for variant in TrainingVariant::ALL {
            for algorithm in Algorithm::ALL {
                cells.push((d, plan, variant, algorithm));
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(d, plan, variant, algorithm)| {
            log::info!("evaluating {} / {variant} / {algorithm}", d.scheme);
            Ok(GridCell {
                scheme: d.scheme,
                variant,
                algorithm,
                report: cross_validate(d, variant, d.scheme, algorithm, plan, config)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::Reliability;

    fn inst(id: usize, text: &str, label: &str, reliability: Reliability) -> LabeledInstance {
        LabeledInstance {
            tweet_id: format!("{reliability:?}{id}"),
            text: text.into(),
            label: label.into(),
            reliability,
        }
    }

    fn dataset() -> LabeledDataset {
        let mut strict = Vec::new();
        for i in 0..40 {
            let (text, label) = if i % 4 == 0 {
                (format!("vaccins zijn gif nummer{i}"), "Negative")
            } else {
                (format!("prik gehaald bij de ggd dag{i}"), "Other")
            };
            strict.push(inst(i, &text, label, Reliability::Strict));
        }
        let lax = (0..6)
            .map(|i| inst(i, "gif en prik", if i % 2 == 0 { "Negative" } else { "Other" }, Reliability::Lax))
            .collect();
        let one = (0..4).map(|i| inst(i, "ggd prik", "Other", Reliability::One)).collect();
        LabeledDataset { scheme: LabelingScheme::Binary, strict, lax, one }
    }

    #[test]
    fn test_folds_cover_strict_set_only() {
        let d = dataset();
        let plan = make_folds(&d.strict, 5, 3).unwrap();
        for variant in TrainingVariant::ALL {
            let out = cross_validate_detailed(&d, variant, d.scheme, Algorithm::Svm, &plan, &ExperimentConfig::default())
                .unwrap();
            let ids: Vec<&str> = out.predictions.iter().map(|p| p.tweet_id.as_str()).collect();
            let strict_ids: Vec<&str> = d.strict.iter().map(|i| i.tweet_id.as_str()).collect();
            assert_eq!(ids, strict_ids);
            assert_eq!(out.report.confusion.total(), d.strict.len());
            assert_eq!(out.report.f1, 1.0);
        }
    }

    #[test]
    fn scheme_mismatch_and_bad_plans_fail() {
        let d = dataset();
        let plan = make_folds(&d.strict, 5, 3).unwrap();
        let cfg = ExperimentConfig::default();
        assert!(matches!(
            cross_validate(&d, TrainingVariant::Strict, LabelingScheme::Polarity, Algorithm::Mnb, &plan, &cfg),
            Err(Error::SchemeMismatch { .. })
        ));
        let short = make_folds(&d.strict[..10], 5, 3).unwrap();
        assert!(cross_validate(&d, TrainingVariant::Strict, d.scheme, Algorithm::Mnb, &short, &cfg).is_err());
    }

    #[test]
    fn full_curve_point_equals_cross_validation() {
        let d = dataset();
        let plan = make_folds(&d.strict, 4, 8).unwrap();
        let cfg = ExperimentConfig::default();
        for algorithm in Algorithm::ALL {
            let curve = learning_curve(&d, TrainingVariant::StrictLax, d.scheme, algorithm, &plan, 4, 8, &cfg).unwrap();
            let cv = cross_validate(&d, TrainingVariant::StrictLax, d.scheme, algorithm, &plan, &cfg).unwrap();
            let last = curve.last().unwrap();
            assert_eq!((last.x, last.precision, last.recall, last.f1, last.auc), (1.0, cv.precision, cv.recall, cv.f1, Some(cv.auc)));
        }
    }

    #[test]
    fn baselines_run_on_the_same_folds() {
        let d = dataset();
        let plan = make_folds(&d.strict, 5, 1).unwrap();
        let lexicon = PolarityLexicon::parse("gif\t-0.8\n").unwrap();
        let lex = baseline_cv(&d, BaselineKind::Lexicon(&lexicon), &plan).unwrap();
        assert_eq!(lex.report.f1, 1.0);
        let all = baseline_cv(&d, BaselineKind::Random { p: 1.0, seed: 0 }, &plan).unwrap();
        assert_eq!(all.report.recall, 1.0);
        assert_eq!(all.report.precision, 0.25);
    }
}
