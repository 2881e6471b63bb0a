use std::io::BufReader;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{ExperimentConfig, ExperimentError, Gap, RunRecord, Scenario, Split};
use crate::corpus::{parse_conll, ArgumentSpan, Corpus};
use crate::eval::{corpus_spans, score, score_unlabeled, InstanceSpans};
use crate::tagging::{read_emissions, viterbi_decode, EmissionFile};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentRun {
    pub records: Vec<RunRecord>,
    pub gaps: Vec<Gap>,
}

impl ExperimentRun {
    /// Orders records and gaps by (model, scenario, split).
    pub fn sort(&mut self) {
        self.records
            .sort_by(|a, b| (&a.model, a.scenario, a.split).cmp(&(&b.model, b.scenario, b.split)));
        self.gaps
            .sort_by(|a, b| (&a.model, a.scenario, a.split).cmp(&(&b.model, b.scenario, b.split)));
    }
}

/// Decodes every emission matrix in a file, in file order.
pub fn decode_all(emissions: &EmissionFile) -> Result<Vec<InstanceSpans>, ExperimentError> {
    emissions
        .instances
        .par_iter()
        .map(|m| {
            let decoded = viterbi_decode(m, &emissions.labels)?;
            Ok((m.id().to_owned(), emissions.labels.tags_to_spans(&decoded.tags)))
        })
        .collect()
}

/// Decodes the emissions of every instance in `gold`, matched by instance id.
/// Token counts must agree.
pub fn decode_against(
    emissions: &EmissionFile,
    gold: &Corpus,
) -> Result<Vec<InstanceSpans>, ExperimentError> {
    gold.instances
        .par_iter()
        .map(|inst| {
            let id = inst.id();
            let m = emissions.get(&id).ok_or_else(|| ExperimentError::Alignment {
                id: id.clone(),
                message: "no emission matrix".into(),
            })?;
            if m.tokens() != inst.tokens.len() {
                return Err(ExperimentError::Alignment {
                    id,
                    message: format!(
                        "{} emission rows for {} tokens",
                        m.tokens(),
                        inst.tokens.len()
                    ),
                });
            }
            let decoded = viterbi_decode(m, &emissions.labels)?;
            let spans: Vec<ArgumentSpan> = emissions.labels.tags_to_spans(&decoded.tags);
            Ok((id, spans))
        })
        .collect()
}

fn load_corpus(path: &Path) -> Result<Corpus, ExperimentError> {
    let file = std::fs::File::open(path).map_err(|source| ExperimentError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_conll(BufReader::new(file)).map_err(|source| ExperimentError::Corpus {
        path: path.to_owned(),
        source: Box::new(source),
    })
}

fn load_emissions(path: &Path) -> Result<EmissionFile, String> {
    let file = std::fs::File::open(path).map_err(|e| format!("cannot open {}: {e}", path.display()))?;
    read_emissions(BufReader::new(file)).map_err(|e| format!("{}: {e}", path.display()))
}

struct Job<'a> {
    model: &'a str,
    scenario: Scenario,
    split: Split,
    emissions: &'a PathBuf,
    gold: &'a Corpus,
}

fn run_job(job: &Job<'_>) -> Result<RunRecord, Gap> {
    let gap = |reason: String| Gap {
        model: job.model.to_owned(),
        scenario: job.scenario,
        split: job.split,
        reason,
    };
    let emissions = load_emissions(job.emissions).map_err(gap)?;
    let pred = decode_against(&emissions, job.gold).map_err(|e| gap(e.to_string()))?;
    let gold = corpus_spans(job.gold);
    let labeled = score(&gold, &pred).map_err(|e| gap(e.to_string()))?;
    let unlabeled = score_unlabeled(&gold, &pred).map_err(|e| gap(e.to_string()))?;
    Ok(RunRecord::new(job.model, job.scenario, job.split, labeled, unlabeled))
}

/// Decodes and scores every (model, fold) run plus the out-of-domain runs.
/// Unreadable or misaligned emission files become [`Gap`]s; a missing gold
/// corpus is an error. Jobs run in parallel; results are merged in
/// (model, scenario, split) order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRun, ExperimentError> {
    let folds = config
        .folds
        .iter()
        .map(|p| load_corpus(p))
        .collect::<Result<Vec<_>, _>>()?;
    let ood = config.out_of_domain.as_deref().map(load_corpus).transpose()?;

    let mut jobs = Vec::new();
    for m in &config.models {
        for (k, path) in m.folds.iter().enumerate() {
            jobs.push(Job {
                model: &m.name,
                scenario: m.scenario,
                split: Split::Test(k),
                emissions: path,
                gold: &folds[k],
            });
        }
        if let Some(gold) = ood.as_ref() {
            let shared = m.out_of_domain.len() == 1;
            for (k, path) in m.out_of_domain.iter().enumerate() {
                jobs.push(Job {
                    model: &m.name,
                    scenario: m.scenario,
                    split: Split::OutOfDomain(if shared { None } else { Some(k) }),
                    emissions: path,
                    gold,
                });
            }
        }
    }

    let outcomes: Vec<Result<RunRecord, Gap>> = jobs.par_iter().map(run_job).collect();
    let mut run = ExperimentRun::default();
    for outcome in outcomes {
        match outcome {
            Ok(r) => run.records.push(r),
            Err(g) => {
                log::warn!("run {} {} {} skipped: {}", g.model, g.scenario, g.split, g.reason);
                run.gaps.push(g);
            }
        }
    }
    run.sort();
    Ok(run)
}
