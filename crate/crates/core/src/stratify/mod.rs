//! Iterative stratification for multi-label instances.
//!
//! Each instance's label set is the set of role labels on its gold spans,
//! without `V`. Folds are filled greedily:
//!
//! 1. take the label with the fewest still-unassigned instances (ties: label order);
//! 2. send each of those instances to the fold with the largest remaining
//!    demand for that label, then the largest remaining capacity, then a
//!    seeded random pick among the tied folds;
//! 3. instances without labels go last, each to the fold with the most
//!    remaining capacity, cycling through tied folds.
//!
//! Capacities and demands are kept as integers scaled by the weight total, so
//! the result depends only on the corpus, the fold weights and the seed.
//! Random picks draw from SplitMix64 seeded with the user seed: one `next_u64`
//! per tie, reduced modulo the number of tied folds.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use thiserror::Error;

use crate::corpus::{Corpus, Instance};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StratifyError {
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("cannot split {n} instances into {k} folds")]
    MoreFoldsThanInstances { k: usize, n: usize },
    #[error("validation target {target} must be smaller than the {n} training instances")]
    TargetTooLarge { target: usize, n: usize },
    #[error("manifest line {0}: {1}")]
    Manifest(usize, String),
}

/// Which labels drive the stratification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelPolicy {
    /// Count `C-x` and `R-x` as labels of their own (the default) or ignore them.
    pub include_continuation_and_reference: bool,
}

impl Default for LabelPolicy {
    fn default() -> Self {
        LabelPolicy {
            include_continuation_and_reference: true,
        }
    }
}

impl LabelPolicy {
    pub fn labels(&self, inst: &Instance) -> BTreeSet<String> {
        inst.spans()
            .iter()
            .map(|s| s.label.as_str())
            .filter(|l| *l != "V")
            .filter(|l| {
                self.include_continuation_and_reference
                    || !(l.starts_with("C-") || l.starts_with("R-"))
            })
            .map(str::to_owned)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub k: usize,
    pub seed: u64,
    /// `(instance id, fold)` in corpus order.
    pub assignment: Vec<(String, usize)>,
}

impl FoldAssignment {
    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.assignment.iter().find(|(i, _)| i == id).map(|(_, f)| *f)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for (_, f) in &self.assignment {
            sizes[*f] += 1;
        }
        sizes
    }

    /// Splits a corpus into per-fold corpora, keeping corpus order in each.
    pub fn fold_corpora(&self, corpus: &Corpus) -> Vec<Corpus> {
        let by_id: BTreeMap<&str, usize> = self
            .assignment
            .iter()
            .map(|(id, f)| (id.as_str(), *f))
            .collect();
        let mut folds = vec![Corpus::default(); self.k];
        for inst in &corpus.instances {
            if let Some(&f) = by_id.get(inst.id().as_str()) {
                folds[f].instances.push(inst.clone());
            }
        }
        folds
    }

    pub fn to_manifest(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "# k={} seed={} instances={}",
            self.k,
            self.seed,
            self.assignment.len()
        )
        .unwrap();
        for (id, fold) in &self.assignment {
            writeln!(out, "{id}\t{fold}").unwrap();
        }
        out
    }

    pub fn from_manifest(text: &str) -> Result<Self, StratifyError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| StratifyError::Manifest(1, "empty manifest".into()))?;
        let mut k = None;
        let mut seed = None;
        for field in header.trim_start_matches('#').split_whitespace() {
            match field.split_once('=') {
                Some(("k", v)) => k = v.parse().ok(),
                Some(("seed", v)) => seed = v.parse().ok(),
                _ => {}
            }
        }
        let (Some(k), Some(seed)) = (k, seed) else {
            return Err(StratifyError::Manifest(1, "header needs k= and seed=".into()));
        };
        let mut assignment = Vec::new();
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let (id, fold) = line
                .split_once('\t')
                .ok_or_else(|| StratifyError::Manifest(n + 1, "expected id<TAB>fold".into()))?;
            let fold: usize = fold
                .trim()
                .parse()
                .ok()
                .filter(|f| *f < k)
                .ok_or_else(|| StratifyError::Manifest(n + 1, format!("bad fold {fold:?}")))?;
            assignment.push((id.to_owned(), fold));
        }
        Ok(FoldAssignment { k, seed, assignment })
    }
}

/// Assigns every label set to one of `weights.len()` folds, aiming at fold
/// sizes and per-label counts proportional to the weights. Zero-weight folds
/// receive nothing.
pub fn iterative_stratification(
    label_sets: &[BTreeSet<String>],
    weights: &[u64],
    seed: u64,
) -> Vec<usize> {
    let n = label_sets.len();
    let total: i128 = weights.iter().map(|&w| w as i128).sum();
    assert!(total > 0, "fold weights must not all be zero");
    let live: Vec<usize> = (0..weights.len()).filter(|&j| weights[j] > 0).collect();
    let mut rng = SplitMix64::seed_from_u64(seed);

    let mut capacity: Vec<i128> = weights.iter().map(|&w| n as i128 * w as i128).collect();
    let mut members: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, labels) in label_sets.iter().enumerate() {
        for l in labels {
            members.entry(l.as_str()).or_default().push(i);
        }
    }
    let mut demand: BTreeMap<&str, Vec<i128>> = members
        .iter()
        .map(|(l, m)| {
            let d = m.len() as i128;
            (*l, weights.iter().map(|&w| d * w as i128).collect())
        })
        .collect();
    let mut remaining: BTreeMap<&str, usize> = members.iter().map(|(l, m)| (*l, m.len())).collect();
    let mut fold = vec![usize::MAX; n];

    let assign = |i: usize,
                      j: usize,
                      fold: &mut Vec<usize>,
                      capacity: &mut Vec<i128>,
                      demand: &mut BTreeMap<&str, Vec<i128>>,
                      remaining: &mut BTreeMap<&str, usize>| {
        fold[i] = j;
        capacity[j] -= total;
        for l in &label_sets[i] {
            demand.get_mut(l.as_str()).unwrap()[j] -= total;
            *remaining.get_mut(l.as_str()).unwrap() -= 1;
        }
    };

    loop {
        let next = remaining
            .iter()
            .filter(|(_, &c)| c > 0)
            .min_by_key(|(l, &c)| (c, **l))
            .map(|(l, _)| *l);
        let Some(label) = next else { break };
        for &i in &members[label] {
            if fold[i] != usize::MAX {
                continue;
            }
            let want = &demand[label];
            let top = live.iter().map(|&j| want[j]).max().unwrap();
            let tied: Vec<usize> = live.iter().copied().filter(|&j| want[j] == top).collect();
            let roomiest = tied.iter().map(|&j| capacity[j]).max().unwrap();
            let tied: Vec<usize> = tied.into_iter().filter(|&j| capacity[j] == roomiest).collect();
            let j = if tied.len() == 1 {
                tied[0]
            } else {
                tied[(rng.next_u64() % tied.len() as u64) as usize]
            };
            assign(i, j, &mut fold, &mut capacity, &mut demand, &mut remaining);
        }
    }

    let mut cursor = 0;
    for i in 0..n {
        if fold[i] != usize::MAX {
            continue;
        }
        let roomiest = live.iter().map(|&j| capacity[j]).max().unwrap();
        let j = (0..live.len())
            .map(|s| live[(cursor + s) % live.len()])
            .find(|&j| capacity[j] == roomiest)
            .unwrap();
        cursor = (live.iter().position(|&f| f == j).unwrap() + 1) % live.len();
        assign(i, j, &mut fold, &mut capacity, &mut demand, &mut remaining);
    }
    fold
}

pub fn stratified_folds(corpus: &Corpus, k: usize, seed: u64) -> Result<FoldAssignment, StratifyError> {
    stratified_folds_with(corpus, k, seed, LabelPolicy::default())
}

pub fn stratified_folds_with(
    corpus: &Corpus,
    k: usize,
    seed: u64,
    policy: LabelPolicy,
) -> Result<FoldAssignment, StratifyError> {
    if k < 2 {
        return Err(StratifyError::TooFewFolds(k));
    }
    if k > corpus.len() {
        return Err(StratifyError::MoreFoldsThanInstances { k, n: corpus.len() });
    }
    let labels: Vec<_> = corpus.instances.iter().map(|i| policy.labels(i)).collect();
    let folds = iterative_stratification(&labels, &vec![1; k], seed);
    Ok(FoldAssignment {
        k,
        seed,
        assignment: corpus
            .instances
            .iter()
            .zip(folds)
            .map(|(i, f)| (i.id(), f))
            .collect(),
    })
}

/// Carves a validation set of about `target_size` instances out of a training
/// set with the same stratification, run as a two-fold split weighted
/// `rest : target`. Returns `(train, validation)` in corpus order.
pub fn carve_validation(
    train: &Corpus,
    target_size: usize,
    seed: u64,
) -> Result<(Corpus, Corpus), StratifyError> {
    let n = train.len();
    if target_size >= n && target_size > 0 {
        return Err(StratifyError::TargetTooLarge {
            target: target_size,
            n,
        });
    }
    if target_size == 0 {
        return Ok((train.clone(), Corpus::default()));
    }
    let policy = LabelPolicy::default();
    let labels: Vec<_> = train.instances.iter().map(|i| policy.labels(i)).collect();
    let weights = [(n - target_size) as u64, target_size as u64];
    let folds = iterative_stratification(&labels, &weights, seed);
    let mut rest = Corpus::default();
    let mut held = Corpus::default();
    for (inst, f) in train.instances.iter().zip(folds) {
        if f == 1 {
            held.instances.push(inst.clone());
        } else {
            rest.instances.push(inst.clone());
        }
    }
    Ok((rest, held))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ArgumentSpan;

    fn corpus_of(label_lists: &[&[&str]]) -> Corpus {
        let instances = label_lists
            .iter()
            .enumerate()
            .map(|(s, labels)| {
                let mut spans = vec![ArgumentSpan::new(0, 0, "V").unwrap()];
                for (k, l) in labels.iter().enumerate() {
                    spans.push(ArgumentSpan::new(k + 1, k + 1, *l).unwrap());
                }
                Instance::new(
                    (s + 1).to_string(),
                    vec!["w".to_string(); labels.len() + 1],
                    0,
                    Some(spans),
                )
            })
            .collect();
        Corpus::new(instances)
    }

    #[test]
    fn perfectly_divisible_single_label_case() {
        let mut lists: Vec<&[&str]> = vec![&["A0"]; 5];
        lists.extend(vec![&["A1"] as &[&str]; 5]);
        let corpus = corpus_of(&lists);
        let fa = stratified_folds(&corpus, 5, 7).unwrap();
        for f in 0..5 {
            let in_fold: Vec<_> = fa
                .assignment
                .iter()
                .enumerate()
                .filter(|(_, (_, g))| *g == f)
                .map(|(i, _)| i)
                .collect();
            assert_eq!(in_fold.len(), 2);
            assert_eq!(in_fold.iter().filter(|&&i| i < 5).count(), 1);
        }
    }

    #[test]
    fn unique_label_lands_in_one_fold() {
        let mut lists: Vec<&[&str]> = vec![&["A0"]; 6];
        lists.push(&["A0", "AM-EXT"]);
        lists.extend(vec![&["A1"] as &[&str]; 5]);
        let corpus = corpus_of(&lists);
        let fa = stratified_folds(&corpus, 2, 1).unwrap();
        let sizes = fa.sizes();
        assert_eq!(sizes.iter().sum::<usize>(), 12);
        assert!(sizes.iter().all(|&s| s == 6));
        let a0: Vec<usize> = (0..7).map(|i| fa.assignment[i].1).collect();
        let a0_in_first = a0.iter().filter(|&&f| f == 0).count();
        assert!((3..=4).contains(&a0_in_first), "{a0:?}");
    }

    #[test]
    fn zero_label_instances_fill_remaining_room() {
        let lists: Vec<&[&str]> = vec![&["A0"], &["A0"], &[], &[], &[], &[]];
        let fa = stratified_folds(&corpus_of(&lists), 3, 0).unwrap();
        assert_eq!(fa.sizes(), [2, 2, 2]);
    }

    #[test]
    fn errors() {
        let corpus = corpus_of(&[&["A0"], &["A1"]]);
        assert_eq!(stratified_folds(&corpus, 1, 0), Err(StratifyError::TooFewFolds(1)));
        assert_eq!(
            stratified_folds(&corpus, 3, 0),
            Err(StratifyError::MoreFoldsThanInstances { k: 3, n: 2 })
        );
        assert!(carve_validation(&corpus, 2, 0).is_err());
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let lists: Vec<&[&str]> = (0..40)
            .map(|i| -> &[&str] {
                match i % 4 {
                    0 => &["A0", "A1"],
                    1 => &["A0"],
                    2 => &["A1", "AM-TMP"],
                    _ => &["A2"],
                }
            })
            .collect();
        let corpus = corpus_of(&lists);
        let a = stratified_folds(&corpus, 4, 99).unwrap();
        let b = stratified_folds(&corpus, 4, 99).unwrap();
        assert_eq!(a, b);
        let seeds: BTreeSet<Vec<(String, usize)>> = (0..8)
            .map(|s| stratified_folds(&corpus, 4, s).unwrap().assignment)
            .collect();
        assert!(seeds.len() > 1);
    }

    #[test]
    fn carve_zero_and_proportional() {
        let lists: Vec<&[&str]> = (0..90).map(|i| -> &[&str] { if i % 3 == 0 { &["A0"] } else { &["A1"] } }).collect();
        let corpus = corpus_of(&lists);
        let (train, val) = carve_validation(&corpus, 0, 3).unwrap();
        assert_eq!((train.len(), val.len()), (90, 0));
        let (train, val) = carve_validation(&corpus, 10, 3).unwrap();
        assert_eq!((train.len(), val.len()), (80, 10));
        let a0 = val.instances.iter().filter(|i| i.spans()[1].label == "A0").count();
        assert!((3..=4).contains(&a0), "{a0}");
    }

    #[test]
    fn manifest_round_trip() {
        let corpus = corpus_of(&[&["A0"], &["A1"], &["A0"], &[]]);
        let fa = stratified_folds(&corpus, 2, 5).unwrap();
        let text = fa.to_manifest();
        assert!(text.starts_with("# k=2 seed=5 instances=4\n"));
        assert_eq!(FoldAssignment::from_manifest(&text).unwrap(), fa);
        assert!(FoldAssignment::from_manifest("# k=2\n").is_err());
        assert!(FoldAssignment::from_manifest("# k=2 seed=1\nx\t7\n").is_err());
        let folds = fa.fold_corpora(&corpus);
        assert_eq!(folds.iter().map(Corpus::len).sum::<usize>(), 4);
    }

    #[test]
    fn policy_can_ignore_prefixed_roles() {
        let corpus = corpus_of(&[&["A0", "C-A0", "R-A0"]]);
        let inst = &corpus.instances[0];
        assert_eq!(LabelPolicy::default().labels(inst).len(), 3);
        let strict = LabelPolicy {
            include_continuation_and_reference: false,
        };
        assert_eq!(strict.labels(inst).len(), 1);
    }
}
