use std::fmt::Write as _;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use serde::Serialize;
use vaxstance_core::agreement::{agreement_report, render_table, AgreementReport, Categorization};
use vaxstance_core::annotation::{aggregate, compose_training, load_annotations, LabeledDataset, LabelingScheme, Reliability};
use vaxstance_core::baselines::PolarityLexicon;
use vaxstance_core::corpus::{apply_filters, load_corpus, save_corpus, CorpusFormat, FilterConfig, FilterReport};
use vaxstance_core::evaluation::{
    baseline_cv, cross_validate_detailed, curve_csv, ensemble_report, learning_curve, make_folds, render_agreement_table,
    render_confusion, render_grid, run_grid, threshold_sweep, BaselineKind, CurvePoint, EnsembleReport, EvalReport,
    GridCell,
};
use vaxstance_core::models::{load_model, save_model};
use vaxstance_core::pipeline::{train_artifact, ExperimentConfig};
use vaxstance_core::synthetic::{generate, write_bundle, SyntheticConfig};
use vaxstance_service::{AppState, ServiceConfig};

use crate::output::{emit, render, Manifest};
use crate::{
    AggregateArgs, AgreementArgs, CellArgs, Cli, Command, CurveArgs, EnsembleArgs, EvalArgs, FilterArgs, Format,
    PredictArgs, ServeArgs, SynthArgs, TrainArgs, UsageError,
};

pub fn run(cli: Cli) -> Result<()> {
    let Cli { seed, format, command } = cli;
    match command {
        Command::Filter(args) => filter(&args, seed, format),
        Command::Aggregate(args) => aggregate_cmd(&args, seed, format),
        Command::Agreement(args) => agreement(&args, seed, format),
        Command::Train(args) => train(&args, seed, format),
        Command::Eval(args) => eval(&args, seed, format),
        Command::Curve(args) => curve(&args, seed, format),
        Command::Sweep(args) => sweep(&args, seed, format),
        Command::Ensemble(args) => ensemble(&args, seed, format),
        Command::Predict(args) => predict(&args, seed, format),
        Command::Serve(args) => serve(&args, seed, format),
        Command::Synth(args) => synth(&args, seed, format),
    }
}

pub fn dataset_file(dir: &Path, scheme: LabelingScheme) -> PathBuf {
    dir.join(format!("{}.json", scheme.name().to_lowercase()))
}

fn load_dataset(dir: &Path, scheme: LabelingScheme) -> Result<LabeledDataset> {
    let path = dataset_file(dir, scheme);
    let dataset = LabeledDataset::load(&path).with_context(|| format!("loading dataset {}", path.display()))?;
    if dataset.scheme != scheme {
        anyhow::bail!("{} holds a {} dataset, expected {scheme}", path.display(), dataset.scheme);
    }
    Ok(dataset)
}

fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| if c == 0 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn filter(args: &FilterArgs, seed: u64, format: Format) -> Result<()> {
    let blacklist: Vec<&str> = args.blacklist.iter().map(String::as_str).filter(|s| !s.trim().is_empty()).collect();
    let config = FilterConfig::new(!args.keep_retweets, !args.keep_urls, &blacklist)
        .map_err(|e| UsageError(e.to_string()))?;
    let tweets = load_corpus(&args.input, CorpusFormat::from_path(&args.input))?;
    let (kept, report) = apply_filters(&tweets, &config);
    save_corpus(&args.out, &kept)?;
    let text = render(format, &report, |r: &FilterReport| {
        table(&[
            vec!["Stage".into(), "Messages".into()],
            vec!["Collected".into(), r.before.to_string()],
            vec!["After retweet filter".into(), r.after_retweets.to_string()],
            vec!["After URL filter".into(), r.after_urls.to_string()],
            vec!["After blacklist".into(), r.after_blacklist.to_string()],
        ])
    })?;
    emit(None, &text)?;
    Manifest::new("filter", seed, format, args).write(Some(&args.out))
}

#[derive(Serialize)]
struct TierCounts {
    scheme: LabelingScheme,
    file: PathBuf,
    strict: usize,
    lax: usize,
    one: usize,
    strict_labels: Vec<(&'static str, usize)>,
}

fn aggregate_cmd(args: &AggregateArgs, seed: u64, format: Format) -> Result<()> {
    let tweets = load_corpus(&args.tweets, CorpusFormat::from_path(&args.tweets))?;
    let records = load_annotations(&args.annotations)?;
    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let schemes = match args.scheme {
        Some(s) => vec![s],
        None => LabelingScheme::ALL.to_vec(),
    };
    let mut counts = Vec::new();
    for scheme in schemes {
        let dataset = aggregate(&records, &tweets, scheme)?;
        let file = dataset_file(&args.out_dir, scheme);
        dataset.save(&file)?;
        counts.push(TierCounts {
            scheme,
            file,
            strict: dataset.strict.len(),
            lax: dataset.lax.len(),
            one: dataset.one.len(),
            strict_labels: dataset.label_counts(Reliability::Strict),
        });
    }
    let text = render(format, &counts, |counts: &Vec<TierCounts>| {
        let mut rows = vec![["Labeling", "Category", "Strict"].map(String::from).to_vec()];
        for c in counts {
            for (label, n) in &c.strict_labels {
                rows.push(vec![c.scheme.to_string(), label.to_string(), n.to_string()]);
            }
        }
        let mut tiers = vec![["Labeling", "Strict", "Lax", "One"].map(String::from).to_vec()];
        for c in counts {
            tiers.push(vec![c.scheme.to_string(), c.strict.to_string(), c.lax.to_string(), c.one.to_string()]);
        }
        table(&tiers) + "\n" + &table(&rows)
    })?;
    emit(None, &text)?;
    Manifest::new("aggregate", seed, format, args).write(Some(&args.out_dir.join("aggregate")))
}

fn agreement(args: &AgreementArgs, seed: u64, format: Format) -> Result<()> {
    let records = load_annotations(&args.annotations)?;
    let reports = Categorization::ALL
        .iter()
        .map(|c| agreement_report(&records, *c))
        .collect::<vaxstance_core::Result<Vec<_>>>()?;
    let text = render(format, &reports, |r: &Vec<AgreementReport>| render_table(r))?;
    emit(args.out.as_deref(), &text)?;
    Manifest::new("agreement", seed, format, args).write(args.out.as_deref())
}

#[derive(Serialize)]
struct TrainSummary<'a> {
    model: &'a Path,
    scheme: LabelingScheme,
    variant: String,
    algorithm: String,
    train_size: usize,
    vocabulary: usize,
    classes: &'a [String],
}

fn train(args: &TrainArgs, seed: u64, format: Format) -> Result<()> {
    let dataset = load_dataset(&args.data_dir, args.scheme)?;
    let instances = compose_training(&dataset, args.variant);
    let artifact = train_artifact(args.scheme, &instances, args.algorithm, &ExperimentConfig::with_seed(seed))?;
    save_model(&artifact, &args.out)?;
    let summary = TrainSummary {
        model: &args.out,
        scheme: args.scheme,
        variant: args.variant.to_string(),
        algorithm: args.algorithm.to_string(),
        train_size: instances.len(),
        vocabulary: artifact.vocabulary.len(),
        classes: artifact.classifier.classes(),
    };
    let text = render(format, &summary, |s: &TrainSummary| {
        format!(
            "Trained {} on {} {} instances ({} labeling), vocabulary {}, classes {}\nModel written to {}\n",
            s.algorithm,
            s.train_size,
            s.variant,
            s.scheme,
            s.vocabulary,
            s.classes.join(", "),
            s.model.display()
        )
    })?;
    emit(None, &text)?;
    Manifest::new("train", seed, format, args).write(Some(&args.out))
}

#[derive(Serialize)]
struct BaselineRow {
    name: String,
    report: EvalReport,
}

#[derive(Serialize)]
struct EvalOutput {
    cells: Vec<GridCell>,
    baselines: Vec<BaselineRow>,
}

fn metric_row(name: &str, r: &EvalReport) -> Vec<String> {
    vec![
        name.to_string(),
        format!("{:.3}", r.precision),
        format!("{:.3}", r.recall),
        format!("{:.3}", r.f1),
        format!("{:.3}", r.auc),
    ]
}

fn baselines(
    dataset: &LabeledDataset,
    plan: &vaxstance_core::evaluation::FoldPlan,
    lexicon: &PolarityLexicon,
    seed: u64,
) -> Result<Vec<BaselineRow>> {
    let runs = [
        ("Lexicon", BaselineKind::Lexicon(lexicon)),
        ("Random 50%", BaselineKind::Random { p: 0.5, seed }),
        ("Random 15%", BaselineKind::Random { p: 0.15, seed: seed.wrapping_add(1) }),
    ];
    runs.into_iter()
        .map(|(name, kind)| Ok(BaselineRow { name: name.into(), report: baseline_cv(dataset, kind, plan)?.report }))
        .collect()
}

fn eval(args: &EvalArgs, seed: u64, format: Format) -> Result<()> {
    let cell = &args.cell;
    let config = ExperimentConfig::with_seed(seed);
    let lexicon = args.lexicon.as_deref().map(PolarityLexicon::load).transpose()?;
    let output = if args.grid {
        let datasets = LabelingScheme::ALL
            .iter()
            .map(|s| load_dataset(&cell.data_dir, *s))
            .collect::<Result<Vec<_>>>()?;
        let cells = run_grid(&datasets, cell.folds, seed, &config)?;
        let baselines = match &lexicon {
            Some(lex) => {
                let polarity = &datasets[2];
                baselines(polarity, &make_folds(&polarity.strict, cell.folds, seed)?, lex, seed)?
            }
            None => Vec::new(),
        };
        EvalOutput { cells, baselines }
    } else {
        let dataset = load_dataset(&cell.data_dir, cell.scheme)?;
        let plan = make_folds(&dataset.strict, cell.folds, seed)?;
        let outcome = cross_validate_detailed(&dataset, cell.variant, cell.scheme, cell.algorithm, &plan, &config)?;
        let baselines = match &lexicon {
            Some(lex) => baselines(&dataset, &plan, lex, seed)?,
            None => Vec::new(),
        };
        EvalOutput {
            cells: vec![GridCell {
                scheme: cell.scheme,
                variant: cell.variant,
                algorithm: cell.algorithm,
                report: outcome.report,
            }],
            baselines,
        }
    };
    let text = render(format, &output, |o: &EvalOutput| {
        let mut text = render_grid(&o.cells);
        if o.cells.len() == 1 {
            text.push('\n');
            text.push_str(&render_confusion(&o.cells[0].report.confusion));
        }
        if !o.baselines.is_empty() {
            let mut rows = vec![["Baseline", "Precision", "Recall", "F1", "AUC"].map(String::from).to_vec()];
            rows.extend(o.baselines.iter().map(|b| metric_row(&b.name, &b.report)));
            text.push('\n');
            text.push_str(&table(&rows));
        }
        text
    })?;
    emit(args.out.as_deref(), &text)?;
    Manifest::new("eval", seed, format, args).write(args.out.as_deref())
}

fn curve_output(format: Format, points: &Vec<CurvePoint>) -> Result<String> {
    render(format, points, |p: &Vec<CurvePoint>| curve_csv(p))
}

fn curve(args: &CurveArgs, seed: u64, format: Format) -> Result<()> {
    let CellArgs { data_dir, scheme, variant, algorithm, folds } = &args.cell;
    let dataset = load_dataset(data_dir, *scheme)?;
    let plan = make_folds(&dataset.strict, *folds, seed)?;
    let points = learning_curve(
        &dataset,
        *variant,
        *scheme,
        *algorithm,
        &plan,
        args.steps,
        seed,
        &ExperimentConfig::with_seed(seed),
    )?;
    emit(args.out.as_deref(), &curve_output(format, &points)?)?;
    Manifest::new("curve", seed, format, args).write(args.out.as_deref())
}

fn sweep(args: &CurveArgs, seed: u64, format: Format) -> Result<()> {
    let CellArgs { data_dir, scheme, variant, algorithm, folds } = &args.cell;
    let dataset = load_dataset(data_dir, *scheme)?;
    let plan = make_folds(&dataset.strict, *folds, seed)?;
    let outcome =
        cross_validate_detailed(&dataset, *variant, *scheme, *algorithm, &plan, &ExperimentConfig::with_seed(seed))?;
    let scored: Vec<(f64, bool)> = outcome.predictions.iter().map(|p| (p.negative_score, p.gold_negative())).collect();
    emit(args.out.as_deref(), &curve_output(format, &threshold_sweep(&scored))?)?;
    Manifest::new("sweep", seed, format, args).write(args.out.as_deref())
}

fn ensemble(args: &EnsembleArgs, seed: u64, format: Format) -> Result<()> {
    let CellArgs { data_dir, scheme, variant, algorithm, folds } = &args.cell;
    let dataset = load_dataset(data_dir, *scheme)?;
    let lexicon = PolarityLexicon::load(&args.lexicon)?;
    let plan = make_folds(&dataset.strict, *folds, seed)?;
    let ml =
        cross_validate_detailed(&dataset, *variant, *scheme, *algorithm, &plan, &ExperimentConfig::with_seed(seed))?;
    let rule = baseline_cv(&dataset, BaselineKind::Lexicon(&lexicon), &plan)?;
    let report = ensemble_report(&ml, &rule)?;
    let ml_name = algorithm.to_string();
    let text = render(format, &report, |r: &EnsembleReport| {
        let mut rows = vec![["System", "Precision", "Recall", "F1", "Flagged"].map(String::from).to_vec()];
        for (name, m) in [("Lexicon", &r.rule), (ml_name.as_str(), &r.ml), ("Ensemble", &r.ensemble)] {
            rows.push(vec![
                name.to_string(),
                format!("{:.3}", m.precision),
                format!("{:.3}", m.recall),
                format!("{:.3}", m.f1),
                m.flagged.to_string(),
            ]);
        }
        table(&rows) + "\n" + &render_agreement_table(&r.agreement, "Lexicon", &ml_name)
    })?;
    emit(args.out.as_deref(), &text)?;
    Manifest::new("ensemble", seed, format, args).write(args.out.as_deref())
}

#[derive(Serialize)]
struct PredictRow {
    id: Option<String>,
    text: String,
    label: String,
    negative_score: f64,
}

fn predict(args: &PredictArgs, seed: u64, format: Format) -> Result<()> {
    if args.text.is_empty() && args.input.is_none() {
        return Err(UsageError("predict needs --text or --in".into()).into());
    }
    let artifact = load_model(&args.model).with_context(|| format!("cannot load model {}", args.model.display()))?;
    let mut inputs: Vec<(Option<String>, String)> = args.text.iter().map(|t| (None, t.clone())).collect();
    if let Some(path) = &args.input {
        inputs.extend(load_corpus(path, CorpusFormat::from_path(path))?.into_iter().map(|t| (Some(t.id), t.text)));
    }
    let mut rows = Vec::with_capacity(inputs.len());
    for (id, text) in inputs {
        let p = artifact.predict_text(&text)?;
        rows.push(PredictRow { id, negative_score: p.negative_score(), label: p.label, text });
    }
    let text = render(format, &rows, |rows: &Vec<PredictRow>| {
        let mut out = String::new();
        for r in rows {
            let id = r.id.as_deref().map(|i| format!("{i}\t")).unwrap_or_default();
            writeln!(out, "{id}{}\t{:.4}\t{}", r.label, r.negative_score, r.text).expect("writing to a String");
        }
        out
    })?;
    emit(args.out.as_deref(), &text)?;
    Manifest::new("predict", seed, format, args).write(args.out.as_deref())
}

fn serve(args: &ServeArgs, seed: u64, format: Format) -> Result<()> {
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .map_err(|e| UsageError(format!("bad listen address: {e}")))?;
    let mut config = ServiceConfig::new(&args.state_dir);
    config.model_path = args.model.clone();
    config.base_dataset = args.dataset.clone();
    config.variant = args.variant;
    config.algorithm = args.algorithm;
    config.flag_threshold = args.flag_threshold;
    config.static_dir = args.static_dir.clone();
    config.experiment = ExperimentConfig::with_seed(seed);
    let state = Arc::new(AppState::open(config)?);
    Manifest::new("serve", seed, format, args).write(None)?;
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(vaxstance_service::serve(state, addr))?;
    Ok(())
}

fn synth(args: &SynthArgs, seed: u64, format: Format) -> Result<()> {
    let config = SyntheticConfig { seed, kept: args.kept, ..SyntheticConfig::default() };
    let corpus = generate(&config)?;
    write_bundle(&corpus, &args.out_dir)?;
    let summary = serde_json::json!({
        "out_dir": args.out_dir,
        "tweets": corpus.tweets.len(),
        "annotations": corpus.annotations.len(),
    });
    let text = render(format, &summary, |_| {
        format!(
            "Wrote {} messages and {} annotations to {}\n",
            corpus.tweets.len(),
            corpus.annotations.len(),
            args.out_dir.display()
        )
    })?;
    emit(None, &text)?;
    Manifest::new("synth", seed, format, args).write(Some(&args.out_dir.join("synth")))
}
