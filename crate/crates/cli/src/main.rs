mod commands;
mod io;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

const LONG_VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    "\nconll format 1\nemission format 1\nrun record format srl-run-record/1\nmanifest format 1"
);

#[derive(Parser, Debug)]
#[command(name = "srl", version, long_version = LONG_VERSION)]
#[command(about = "Semantic role labeling: corpus cleaning, fold splits, decoding, scoring and experiment tables")]
pub struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Only log errors.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Apply cleaning rules to a corpus and write it in CoNLL format.
    Preprocess(PreprocessArgs),
    /// Write stratified k-fold files and an assignment manifest.
    Split(SplitArgs),
    /// Viterbi-decode an emission file into CoNLL predictions.
    Decode(DecodeArgs),
    /// Score predictions against gold annotation.
    Eval(EvalArgs),
    /// Decode and score every run listed in an experiment config.
    Run(RunArgs),
    /// Aggregate stored run records into a results table.
    Report(ReportArgs),
    /// Pick a model for clean or unclean text and a set of roles.
    Select(SelectArgs),
    /// Emission scores from a count-based baseline trained on a corpus.
    Baseline(BaselineArgs),
    /// Instance, argument and role counts of a corpus.
    Summary(SummaryArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputFormat {
    Conll,
    Xml,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFormat {
    Table,
    Tsv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Data {
    Clean,
    Unclean,
}

#[derive(Args, Debug)]
pub struct PreprocessArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "conll")]
    pub format: InputFormat,
    /// Comma-separated rule names, or `all`.
    #[arg(long, default_value = "all")]
    pub rules: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
    /// Contraction table replacing the built-in one.
    #[arg(long)]
    pub contractions: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SplitArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Stratify on base roles only, ignoring C- and R- labels.
    #[arg(long)]
    pub base_roles_only: bool,
}

#[derive(Args, Debug)]
pub struct DecodeArgs {
    #[arg(long)]
    pub emissions: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Corpus supplying tokens and predicates; every instance must have emissions.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long)]
    pub pred: PathBuf,
    /// Score span boundaries only.
    #[arg(long)]
    pub unlabeled: bool,
    /// Add the identification/classification error breakdown.
    #[arg(long)]
    pub decompose: bool,
    /// Table destination; key-value text goes to `<out>.kv`.
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(long)]
    pub runs: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    pub format: TableFormat,
    /// Pool counts across folds instead of averaging fold scores.
    #[arg(long)]
    pub pooled: bool,
    /// Scenario the delta-F1 columns are measured against.
    #[arg(long)]
    pub baseline_scenario: Option<String>,
    /// Model the delta-F1 columns are measured against (default: the row's own model).
    #[arg(long, requires = "baseline_scenario")]
    pub baseline_model: Option<String>,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SelectArgs {
    #[arg(long)]
    pub runs: PathBuf,
    #[arg(long, value_enum)]
    pub data: Data,
    /// Comma-separated roles of interest.
    #[arg(long)]
    pub roles: Option<String>,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BaselineArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SummaryArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "conll")]
    pub format: InputFormat,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure::Usage(msg.into())
    }

    pub fn data(msg: impl fmt::Display + fmt::Debug + Send + Sync + 'static) -> Self {
        Failure::Data(anyhow::Error::msg(msg))
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Data(e) => write!(f, "{e:#}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();

    match commands::dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("srl: error: {f}");
            if let Failure::Usage(_) = f {
                eprintln!("Run 'srl --help' for usage.");
            }
            ExitCode::from(f.code())
        }
    }
}
