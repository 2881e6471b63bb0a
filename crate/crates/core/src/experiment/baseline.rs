//! Deterministic emission sources: a count-based baseline and the oracle and
//! uniform score matrices used for pipeline checks.

use std::collections::HashMap;

use super::ExperimentError;
use crate::corpus::{Corpus, Instance};
use crate::tagging::{EmissionFile, EmissionMatrix, LabelSet};

/// Signed token distance to the predicate, clipped to `-2..=2` or `Far`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceBucket {
    Near(i8),
    Far,
}

impl DistanceBucket {
    pub fn of(token: usize, predicate: usize) -> Self {
        let d = token as i64 - predicate as i64;
        if (-2..=2).contains(&d) {
            DistanceBucket::Near(d as i8)
        } else {
            DistanceBucket::Far
        }
    }
}

type Key = (String, bool, DistanceBucket);

fn key(inst: &Instance, pos: usize) -> Key {
    (
        inst.tokens[pos].clone(),
        pos == inst.predicate_index,
        DistanceBucket::of(pos, inst.predicate_index),
    )
}

fn log_dist(counts: &[u64]) -> Vec<f64> {
    // add-one smoothing
    let total: u64 = counts.iter().sum::<u64>() + counts.len() as u64;
    counts
        .iter()
        .map(|&c| ((c + 1) as f64 / total as f64).ln())
        .collect()
}

/// Per-token tag distributions keyed by (surface form, is-predicate,
/// distance bucket), estimated on `train` with add-one smoothing. Unseen keys
/// fall back to the smoothed global tag distribution. The label set is the
/// training inventory.
pub fn baseline_emissions(train: &Corpus, test: &Corpus) -> Result<EmissionFile, ExperimentError> {
    let labels = train.label_set();
    let width = labels.num_tags();
    let mut by_key: HashMap<Key, Vec<u64>> = HashMap::new();
    let mut global = vec![0u64; width];
    for inst in &train.instances {
        let tags = inst.gold_tags(&labels)?;
        for (pos, &t) in tags.iter().enumerate() {
            by_key.entry(key(inst, pos)).or_insert_with(|| vec![0; width])[t] += 1;
            global[t] += 1;
        }
    }
    let fallback = log_dist(&global);
    let table: HashMap<&Key, Vec<f64>> = by_key.iter().map(|(k, c)| (k, log_dist(c))).collect();

    let instances = test
        .instances
        .iter()
        .map(|inst| {
            let rows = (0..inst.tokens.len())
                .map(|pos| table.get(&key(inst, pos)).unwrap_or(&fallback).clone())
                .collect();
            EmissionMatrix::new(inst.id(), width, rows).map_err(ExperimentError::from)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EmissionFile { labels, instances })
}

/// Puts `confidence` on each gold tag and spreads the rest evenly.
pub fn oracle_emissions(corpus: &Corpus, labels: &LabelSet, confidence: f64) -> Result<EmissionFile, ExperimentError> {
    let width = labels.num_tags();
    assert!(width > 1 && confidence > 0.0 && confidence < 1.0);
    let hit = confidence.ln();
    let miss = ((1.0 - confidence) / (width - 1) as f64).ln();
    let instances = corpus
        .instances
        .iter()
        .map(|inst| {
            let tags = inst.gold_tags(labels)?;
            let rows = tags
                .iter()
                .map(|&t| (0..width).map(|j| if j == t { hit } else { miss }).collect())
                .collect();
            EmissionMatrix::new(inst.id(), width, rows).map_err(ExperimentError::from)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EmissionFile {
        labels: labels.clone(),
        instances,
    })
}

pub fn uniform_emissions(corpus: &Corpus, labels: &LabelSet) -> EmissionFile {
    let width = labels.num_tags();
    let p = (1.0 / width as f64).ln();
    let instances = corpus
        .instances
        .iter()
        .map(|inst| {
            EmissionMatrix::new(inst.id(), width, vec![vec![p; width]; inst.tokens.len()])
                .expect("uniform rows are finite and rectangular")
        })
        .collect();
    EmissionFile {
        labels: labels.clone(),
        instances,
    }
}
