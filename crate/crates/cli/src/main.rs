//! `mtltag`: train, apply and evaluate multi-task sequence taggers.

mod commands;
mod conll;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mtl_tagger::run::RunError;

/// Environment variable naming the directory that relative output paths
/// are resolved against.
pub const RESULTS_DIR_VAR: &str = "MTLTAG_RESULTS_DIR";

#[derive(Parser)]
#[command(name = "mtltag", version, about = "Multi-task sequence tagging with shared recurrent layers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model from a YAML run configuration.
    Train(TrainArgs),
    /// Append predicted labels to a CoNLL file.
    Predict(PredictArgs),
    /// Score a model on labelled data, or score a prediction file.
    Evaluate(EvaluateArgs),
    /// Random hyper-parameter search over a templated configuration.
    Search(TrainArgs),
    /// Document, token and label statistics of CoNLL files.
    Stats(StatsArgs),
    /// Append natural-subtask label columns derived from AM labels.
    DeriveSubtasks(DeriveArgs),
    /// Repair a label column in place.
    Postprocess(PostprocessArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// YAML run configuration.
    config: PathBuf,
    /// Override a config value, e.g. `--set training.epochs=5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory; relative paths are placed under $MTLTAG_RESULTS_DIR.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Postprocess {
    None,
    /// Turn stray I- labels into B- labels.
    Bio,
    /// Turn stray I- labels into O.
    BioOutside,
    /// Repair argumentation structures per document.
    Am,
}

#[derive(Args)]
struct PredictArgs {
    /// Model checkpoint.
    #[arg(long, short)]
    model: PathBuf,
    /// CoNLL input; all columns are kept.
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    token_column: usize,
    /// Task to predict; defaults to the first task of the model.
    #[arg(long)]
    task: Option<String>,
    #[arg(long, value_enum, default_value_t = Postprocess::None)]
    postprocess: Postprocess,
    /// Write here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Model checkpoint; requires --input and --label-column.
    #[arg(long, short, conflicts_with = "predictions")]
    model: Option<PathBuf>,
    /// Labelled CoNLL input for --model.
    #[arg(long, short, requires = "model")]
    input: Option<PathBuf>,
    /// Gold label column of --input.
    #[arg(long)]
    label_column: Option<usize>,
    /// Task to evaluate; defaults to the first task of the model.
    #[arg(long)]
    task: Option<String>,
    /// CoNLL file holding gold and predicted labels.
    #[arg(long, short)]
    predictions: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    token_column: usize,
    /// Gold column of --predictions.
    #[arg(long, default_value_t = 1)]
    gold_column: usize,
    /// Predicted column of --predictions; defaults to the last column.
    #[arg(long)]
    pred_column: Option<usize>,
    /// Comma-separated metric names.
    #[arg(long, value_delimiter = ',', default_value = "f1")]
    metrics: Vec<String>,
    /// Repair predicted BIO sequences before token metrics.
    #[arg(long, value_enum)]
    bio_repair: Option<BioRepair>,
    /// Score AM metrics on predicted structures as they are.
    #[arg(long)]
    no_am_postprocess: bool,
    /// Alignment symbol for an empty output.
    #[arg(long)]
    empty_symbol: Option<String>,
    /// Alignment symbol joining several outputs.
    #[arg(long)]
    join_symbol: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BioRepair {
    ToBegin,
    ToOutside,
}

#[derive(Args)]
struct StatsArgs {
    /// CoNLL files; one report row each.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[arg(long, default_value_t = 0)]
    token_column: usize,
    #[arg(long, default_value_t = 1)]
    label_column: usize,
}

#[derive(Args)]
struct DeriveArgs {
    #[arg(long, short)]
    input: PathBuf,
    /// Column holding AM labels.
    #[arg(long)]
    label_column: usize,
    /// Comma-separated subtasks out of ACS, ACI, ARS, ARI.
    #[arg(long, value_delimiter = ',', default_value = "ACS,ACI,ARS,ARI")]
    subtasks: Vec<String>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PostprocessArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long)]
    label_column: usize,
    #[arg(long, value_enum)]
    scheme: Postprocess,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Train(a) => commands::train(&a),
        Command::Search(a) => commands::search(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Stats(a) => commands::stats(&a),
        Command::DeriveSubtasks(a) => commands::derive_subtasks(&a),
        Command::Postprocess(a) => commands::postprocess(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mtltag: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

pub(crate) type CmdResult = Result<(), RunError>;
