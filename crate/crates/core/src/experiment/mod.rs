//! Fold runs, cross-fold aggregation and model selection.

mod aggregate;
mod baseline;
mod config;
mod record;
mod runner;
mod select;

pub use aggregate::{aggregate, AggregateOptions, AggregateRow, AggregateTable, BestFold, Means};
pub use baseline::{baseline_emissions, oracle_emissions, uniform_emissions, DistanceBucket};
pub use config::{Baseline, ExperimentConfig, ModelEntry};
pub use record::{read_records, write_records, Gap, RunRecord, Split};
pub use runner::{decode_against, decode_all, run_experiment, ExperimentRun};
pub use select::{select_model, DataKind, ModelChoice, RoleFilter};

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Deserialize;
use thiserror::Error;

use crate::corpus::CorpusError;
use crate::eval::EvalError;
use crate::tagging::{EmissionFormatError, TaggingError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Corpus {
        path: PathBuf,
        #[source]
        source: Box<CorpusError>,
    },
    #[error(transparent)]
    CorpusData(#[from] CorpusError),
    #[error(transparent)]
    Emissions(#[from] EmissionFormatError),
    #[error(transparent)]
    Tagging(#[from] TaggingError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("instance {id}: {message}")]
    Alignment { id: String, message: String },
    #[error("{path}:{line}: {message}")]
    Record {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("role {0} does not occur in any run report")]
    UnknownRole(String),
    #[error("no run records for {0}")]
    NoRecords(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Training regime a model's runs belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
pub enum Scenario {
    #[serde(rename = "pt-only")]
    PtOnly,
    #[serde(rename = "+En")]
    PlusEn,
    #[serde(rename = "zero-shot")]
    ZeroShot,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::PtOnly => "pt-only",
            Scenario::PlusEn => "+En",
            Scenario::ZeroShot => "zero-shot",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pt-only" => Ok(Scenario::PtOnly),
            "+En" => Ok(Scenario::PlusEn),
            "zero-shot" => Ok(Scenario::ZeroShot),
            other => Err(format!("unknown scenario {other:?}")),
        }
    }
}
