//! Run records persisted as one key-value text file per record.
//!
//! ```text
//! format=srl-run-record/1
//! model=brbert-base
//! scenario=pt-only
//! split=3            # test fold 3; "ood" or "ood.3" for out-of-domain runs
//! instances=1366
//! perfect=512
//! overall.correct=2350
//! overall.excess=700
//! overall.missed=690
//! label.A0.correct=...
//! unlabeled.correct=...
//! unlabeled.excess=...
//! unlabeled.missed=...
//! unlabeled.perfect=...
//! decomposition.total_error=...
//! ```
//!
//! Decomposition lines are informational; readers recompute them from counts.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{ExperimentError, ExperimentRun, Scenario};
use crate::eval::{Counts, ErrorDecomposition, EvalReport};

pub const RECORD_FORMAT: &str = "srl-run-record/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Test(usize),
    /// Out-of-domain evaluation, optionally of the model trained for a fold.
    OutOfDomain(Option<usize>),
}

impl Split {
    pub fn is_test(self) -> bool {
        matches!(self, Split::Test(_))
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Split::Test(k) => write!(f, "{k}"),
            Split::OutOfDomain(None) => f.write_str("ood"),
            Split::OutOfDomain(Some(k)) => write!(f, "ood.{k}"),
        }
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("bad split {s:?}");
        match s.strip_prefix("ood") {
            Some("") => Ok(Split::OutOfDomain(None)),
            Some(rest) => rest
                .strip_prefix('.')
                .and_then(|k| k.parse().ok())
                .map(|k| Split::OutOfDomain(Some(k)))
                .ok_or_else(bad),
            None => s.parse().map(Split::Test).map_err(|_| bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub model: String,
    pub scenario: Scenario,
    pub split: Split,
    pub report: EvalReport,
    pub unlabeled: EvalReport,
    pub decomposition: ErrorDecomposition,
}

impl RunRecord {
    pub fn new(model: &str, scenario: Scenario, split: Split, report: EvalReport, unlabeled: EvalReport) -> Self {
        let decomposition = ErrorDecomposition::from_reports(&report, &unlabeled);
        RunRecord {
            model: model.to_owned(),
            scenario,
            split,
            report,
            unlabeled,
            decomposition,
        }
    }

    pub fn key(&self) -> (&str, Scenario, Split) {
        (&self.model, self.scenario, self.split)
    }

    pub fn file_stem(&self) -> String {
        file_stem(&self.model, self.scenario, self.split)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: &dyn fmt::Display| writeln!(s, "{k}={v}").unwrap();
        kv("format", &RECORD_FORMAT);
        kv("model", &self.model);
        kv("scenario", &self.scenario);
        kv("split", &self.split);
        kv("instances", &self.report.instances);
        kv("perfect", &self.report.perfect);
        let mut counts = |prefix: &str, c: &Counts| {
            kv(&format!("{prefix}.correct"), &c.correct);
            kv(&format!("{prefix}.excess"), &c.excess);
            kv(&format!("{prefix}.missed"), &c.missed);
        };
        counts("overall", &self.report.overall);
        for (label, c) in &self.report.per_label {
            counts(&format!("label.{label}"), c);
        }
        counts("unlabeled", &self.unlabeled.overall);
        kv("unlabeled.perfect", &self.unlabeled.perfect);
        kv("decomposition.total_error", &self.decomposition.total_error);
        kv("decomposition.arg_id_error", &self.decomposition.arg_id_error);
        kv("decomposition.arg_class_error", &self.decomposition.arg_class_error);
        s
    }

    pub fn from_text(text: &str, path: &Path) -> Result<Self, ExperimentError> {
        let err = |line: usize, message: String| ExperimentError::Record {
            path: path.to_owned(),
            line,
            message,
        };
        let mut fields: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(n + 1, "expected key=value".into()))?;
            fields.insert(k, (n + 1, v));
        }
        let get = |k: &str| -> Result<(usize, &str), ExperimentError> {
            fields.get(k).copied().ok_or_else(|| err(0, format!("missing {k}")))
        };
        let num = |k: &str| -> Result<usize, ExperimentError> {
            let (n, v) = get(k)?;
            v.parse().map_err(|_| err(n, format!("{k} is not a count")))
        };
        let (n, format) = get("format")?;
        if format != RECORD_FORMAT {
            return Err(err(n, format!("unsupported format {format:?}")));
        }
        let (n, scenario) = get("scenario")?;
        let scenario = scenario.parse().map_err(|e| err(n, e))?;
        let (n, split) = get("split")?;
        let split = split.parse().map_err(|e| err(n, e))?;
        let counts = |prefix: &str| -> Result<Counts, ExperimentError> {
            Ok(Counts {
                correct: num(&format!("{prefix}.correct"))?,
                excess: num(&format!("{prefix}.excess"))?,
                missed: num(&format!("{prefix}.missed"))?,
            })
        };
        let mut per_label = BTreeMap::new();
        for key in fields.keys() {
            if let Some(label) = key.strip_prefix("label.").and_then(|k| k.strip_suffix(".correct")) {
                per_label.insert(label.to_owned(), counts(&format!("label.{label}"))?);
            }
        }
        let instances = num("instances")?;
        let report = EvalReport {
            instances,
            perfect: num("perfect")?,
            overall: counts("overall")?,
            per_label,
            unlabeled: false,
            delta_f1: None,
        };
        let unlabeled = EvalReport {
            instances,
            perfect: num("unlabeled.perfect")?,
            overall: counts("unlabeled")?,
            per_label: BTreeMap::new(),
            unlabeled: true,
            delta_f1: None,
        };
        Ok(RunRecord::new(get("model")?.1, scenario, split, report, unlabeled))
    }
}

/// A run that could not be scored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gap {
    pub model: String,
    pub scenario: Scenario,
    pub split: Split,
    pub reason: String,
}

impl Gap {
    pub fn to_text(&self) -> String {
        format!(
            "format={RECORD_FORMAT}\nmodel={}\nscenario={}\nsplit={}\ngap={}\n",
            self.model,
            self.scenario,
            self.split,
            self.reason.replace('\n', " ")
        )
    }
}

fn file_stem(model: &str, scenario: Scenario, split: Split) -> String {
    let clean = |s: &str| -> String {
        s.chars()
            .map(|c| if c.is_ascii_alphanumeric() || "-._".contains(c) { c } else { '_' })
            .collect()
    };
    format!("{}__{}__{}", clean(model), clean(scenario.as_str()), clean(&split.to_string()))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Writes `<stem>.run` per record and `<stem>.gap` per gap.
pub fn write_records(dir: &Path, run: &ExperimentRun) -> Result<Vec<PathBuf>, ExperimentError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    for r in &run.records {
        let path = dir.join(format!("{}.run", r.file_stem()));
        std::fs::write(&path, r.to_text()).map_err(io_err(&path))?;
        written.push(path);
    }
    for g in &run.gaps {
        let path = dir.join(format!("{}.gap", file_stem(&g.model, g.scenario, g.split)));
        std::fs::write(&path, g.to_text()).map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}

/// Reads every `.run` file in a directory; `.gap` files are listed as gaps.
pub fn read_records(dir: &Path) -> Result<ExperimentRun, ExperimentError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    paths.sort();
    let mut run = ExperimentRun::default();
    for path in paths {
        match path.extension().and_then(|e| e.to_str()) {
            Some("run") => {
                let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
                run.records.push(RunRecord::from_text(&text, &path)?);
            }
            Some("gap") => {
                let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
                let field = |k: &str| {
                    text.lines()
                        .find_map(|l| l.strip_prefix(k).and_then(|r| r.strip_prefix('=')))
                        .unwrap_or("")
                        .to_owned()
                };
                let bad = |m: String| ExperimentError::Record {
                    path: path.clone(),
                    line: 0,
                    message: m,
                };
                run.gaps.push(Gap {
                    model: field("model"),
                    scenario: field("scenario").parse().map_err(bad)?,
                    split: field("split").parse().map_err(bad)?,
                    reason: field("gap"),
                });
            }
            _ => {}
        }
    }
    run.sort();
    Ok(run)
}
