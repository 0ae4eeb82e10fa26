//! `vaxstance` command-line entry point.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use vaxstance_core::annotation::{LabelingScheme, TrainingVariant};
use vaxstance_core::models::Algorithm;

/// Stance monitoring pipeline for vaccination messages.
#[derive(Debug, Parser)]
#[command(name = "vaxstance", version, about)]
struct Cli {
    /// Seed for every random choice in the run.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Table,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Drop retweets, URL messages and blacklisted topics from a corpus.
    Filter(FilterArgs),
    /// Turn annotations into strict/lax/one datasets, one file per labeling scheme.
    Aggregate(AggregateArgs),
    /// Inter-annotator agreement per categorization.
    Agreement(AgreementArgs),
    /// Train a model on an aggregated dataset.
    Train(TrainArgs),
    /// Cross-validate one configuration, or the full grid with --grid.
    Eval(EvalArgs),
    /// Learning curve over growing shares of the strict training data, as CSV.
    Curve(CurveArgs),
    /// Precision/recall at every Negative score threshold, as CSV.
    Sweep(CurveArgs),
    /// Compare a learner with the lexicon baseline and their OR-ensemble.
    Ensemble(EnsembleArgs),
    /// Classify texts with a saved model.
    Predict(PredictArgs),
    /// Run the review service.
    Serve(ServeArgs),
    /// Write the synthetic demo corpus.
    Synth(SynthArgs),
}

#[derive(Debug, Args, Serialize)]
struct FilterArgs {
    /// Input corpus (.jsonl or .csv).
    #[arg(long = "in")]
    input: PathBuf,
    /// Where to write the kept messages as JSONL.
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated blacklist substrings.
    #[arg(long, value_delimiter = ',', default_values_t = ["dier".to_string(), "landbouw".to_string(), "teek".to_string()])]
    blacklist: Vec<String>,
    #[arg(long)]
    keep_retweets: bool,
    #[arg(long)]
    keep_urls: bool,
}

#[derive(Debug, Args, Serialize)]
struct AggregateArgs {
    /// Corpus whose messages were annotated.
    #[arg(long)]
    tweets: PathBuf,
    /// Annotation file (.csv or .jsonl).
    #[arg(long)]
    annotations: PathBuf,
    /// Directory receiving one dataset file per scheme.
    #[arg(long)]
    out_dir: PathBuf,
    /// Only this scheme; all four by default.
    #[arg(long)]
    scheme: Option<LabelingScheme>,
}

#[derive(Debug, Args, Serialize)]
struct AgreementArgs {
    #[arg(long)]
    annotations: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Which learner and data to use.
#[derive(Debug, Clone, Args, Serialize)]
struct CellArgs {
    /// Directory written by `aggregate`.
    #[arg(long)]
    data_dir: PathBuf,
    #[arg(long, default_value = "Polarity")]
    scheme: LabelingScheme,
    #[arg(long, default_value = "Strict+Lax")]
    variant: TrainingVariant,
    #[arg(long, default_value = "SVM")]
    algorithm: Algorithm,
    #[arg(long, default_value_t = 10)]
    folds: usize,
}

#[derive(Debug, Args, Serialize)]
struct TrainArgs {
    /// Directory written by `aggregate`.
    #[arg(long)]
    data_dir: PathBuf,
    #[arg(long, default_value = "Polarity")]
    scheme: LabelingScheme,
    #[arg(long, default_value = "Strict+Lax")]
    variant: TrainingVariant,
    #[arg(long, default_value = "SVM")]
    algorithm: Algorithm,
    /// Model file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct EvalArgs {
    #[command(flatten)]
    cell: CellArgs,
    /// Evaluate all 32 labeling x training x learner cells.
    #[arg(long)]
    grid: bool,
    /// Also evaluate the lexicon baseline from this file and the random baselines.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct CurveArgs {
    #[command(flatten)]
    cell: CellArgs,
    /// Number of curve points (learning curve only).
    #[arg(long, default_value_t = 10)]
    steps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct EnsembleArgs {
    #[command(flatten)]
    cell: CellArgs,
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Text to classify; repeatable.
    #[arg(long)]
    text: Vec<String>,
    /// Corpus file whose messages are classified.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Aggregated dataset file used as the base for retraining.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Queue, feedback log and retrained models.
    #[arg(long, default_value = "review-state")]
    state_dir: PathBuf,
    #[arg(long, default_value = "Strict+Lax")]
    variant: TrainingVariant,
    #[arg(long, default_value = "SVM")]
    algorithm: Algorithm,
    /// Flag when the Negative pseudo-probability reaches this; default flags predicted Negative.
    #[arg(long)]
    flag_threshold: Option<f64>,
    /// Static files for the web UI.
    #[arg(long)]
    static_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct SynthArgs {
    #[arg(long)]
    out_dir: PathBuf,
    /// Messages that survive filtering.
    #[arg(long, default_value_t = 4_600)]
    kept: usize,
}

/// Bad flag combinations detected after parsing.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
