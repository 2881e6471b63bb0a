//! Span-level scoring compatible with the CoNLL-2005 `srl-eval.pl` conventions.
//!
//! A predicted argument counts as correct only when a not-yet-matched gold
//! argument of the same instance has identical boundaries and label. Gold and
//! predicted spans are multisets. `V` arguments are listed per label but never
//! enter the overall counts. `C-x` and `R-x` are labels of their own.

mod report;

pub use report::{format_key_values, format_table, percent};

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::corpus::{ArgumentSpan, Corpus};

/// Spans for one instance, keyed by instance id.
pub type InstanceSpans = (String, Vec<ArgumentSpan>);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("instance id {0} appears twice in the {1} stream")]
    DuplicateId(String, &'static str),
    #[error("instance ids do not align; gold only: [{}], predictions only: [{}]", gold_only.join(", "), pred_only.join(", "))]
    Misaligned {
        gold_only: Vec<String>,
        pred_only: Vec<String>,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub correct: usize,
    pub excess: usize,
    pub missed: usize,
}

impl Counts {
    pub fn predicted(&self) -> usize {
        self.correct + self.excess
    }

    pub fn gold(&self) -> usize {
        self.correct + self.missed
    }

    pub fn precision(&self) -> f64 {
        ratio(self.correct, self.predicted())
    }

    pub fn recall(&self) -> f64 {
        ratio(self.correct, self.gold())
    }

    /// Harmonic mean of precision and recall, computed from counts as
    /// `2c / (2c + excess + missed)`.
    pub fn f1(&self) -> f64 {
        ratio(2 * self.correct, 2 * self.correct + self.excess + self.missed)
    }

    pub fn is_empty(&self) -> bool {
        self.correct + self.excess + self.missed == 0
    }
}

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, rhs: Counts) {
        self.correct += rhs.correct;
        self.excess += rhs.excess;
        self.missed += rhs.missed;
    }
}

impl std::iter::Sum for Counts {
    fn sum<I: Iterator<Item = Counts>>(iter: I) -> Counts {
        let mut total = Counts::default();
        for c in iter {
            total += c;
        }
        total
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    pub instances: usize,
    /// Instances whose non-`V` arguments were all found with nothing extra.
    pub perfect: usize,
    pub overall: Counts,
    /// Per role label, `V` included. Empty for unlabeled scoring.
    pub per_label: BTreeMap<String, Counts>,
    pub unlabeled: bool,
    pub delta_f1: Option<f64>,
}

impl EvalReport {
    pub fn precision(&self) -> f64 {
        self.overall.precision()
    }

    pub fn recall(&self) -> f64 {
        self.overall.recall()
    }

    pub fn f1(&self) -> f64 {
        self.overall.f1()
    }

    pub fn label(&self, label: &str) -> Counts {
        self.per_label.get(label).copied().unwrap_or_default()
    }

    /// Pooled counts over a subset of labels.
    pub fn restricted(&self, labels: &BTreeSet<String>) -> Counts {
        labels.iter().map(|l| self.label(l)).sum()
    }
}

/// Total error split at the unlabeled-F1 waypoint: boundary mistakes
/// (`arg_id_error`) plus labeling mistakes on correctly bounded spans
/// (`arg_class_error`).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ErrorDecomposition {
    pub total_error: f64,
    pub arg_id_error: f64,
    pub arg_class_error: f64,
}

impl ErrorDecomposition {
    pub fn from_reports(labeled: &EvalReport, unlabeled: &EvalReport) -> Self {
        let labeled_f1 = labeled.f1();
        let unlabeled_f1 = unlabeled.f1();
        ErrorDecomposition {
            total_error: 1.0 - labeled_f1,
            arg_id_error: 1.0 - unlabeled_f1,
            arg_class_error: unlabeled_f1 - labeled_f1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Delta {
    pub delta_f1: f64,
    pub delta_precision: f64,
    pub delta_recall: f64,
    /// F1 difference per label over the union of both reports' labels.
    pub per_label: BTreeMap<String, f64>,
}

fn index<'a>(
    stream: &'a [InstanceSpans],
    name: &'static str,
) -> Result<BTreeMap<&'a str, &'a [ArgumentSpan]>, EvalError> {
    let mut map = BTreeMap::new();
    for (id, spans) in stream {
        if map.insert(id.as_str(), spans.as_slice()).is_some() {
            return Err(EvalError::DuplicateId(id.clone(), name));
        }
    }
    Ok(map)
}

type SpanPair<'a> = (&'a [ArgumentSpan], &'a [ArgumentSpan]);

fn aligned<'a>(gold: &'a [InstanceSpans], pred: &'a [InstanceSpans]) -> Result<Vec<SpanPair<'a>>, EvalError> {
    let g = index(gold, "gold")?;
    let p = index(pred, "prediction")?;
    let gold_only: Vec<String> = g.keys().filter(|k| !p.contains_key(*k)).map(|k| k.to_string()).collect();
    let pred_only: Vec<String> = p.keys().filter(|k| !g.contains_key(*k)).map(|k| k.to_string()).collect();
    if !gold_only.is_empty() || !pred_only.is_empty() {
        return Err(EvalError::Misaligned {
            gold_only,
            pred_only,
        });
    }
    Ok(g.iter().map(|(id, spans)| (*spans, p[id])).collect())
}

fn multiset<K: Ord>(keys: impl Iterator<Item = K>) -> BTreeMap<K, usize> {
    let mut m = BTreeMap::new();
    for k in keys {
        *m.entry(k).or_insert(0) += 1;
    }
    m
}

/// Labeled span scoring.
pub fn score(gold: &[InstanceSpans], pred: &[InstanceSpans]) -> Result<EvalReport, EvalError> {
    let pairs = aligned(gold, pred)?;
    let mut report = EvalReport {
        instances: pairs.len(),
        ..Default::default()
    };
    for (g, p) in pairs {
        let gm = multiset(g.iter().map(|s| (s.start, s.end, s.label.as_str())));
        let pm = multiset(p.iter().map(|s| (s.start, s.end, s.label.as_str())));
        let mut local = Counts::default();
        let keys: BTreeSet<_> = gm.keys().chain(pm.keys()).copied().collect();
        for key in keys {
            let gc = gm.get(&key).copied().unwrap_or(0);
            let pc = pm.get(&key).copied().unwrap_or(0);
            let hit = gc.min(pc);
            let c = Counts {
                correct: hit,
                excess: pc - hit,
                missed: gc - hit,
            };
            *report.per_label.entry(key.2.to_owned()).or_default() += c;
            if key.2 != "V" {
                local += c;
            }
        }
        if local.excess == 0 && local.missed == 0 {
            report.perfect += 1;
        }
        report.overall += local;
    }
    Ok(report)
}

/// Boundary-only scoring; `V` spans are dropped from both sides.
pub fn score_unlabeled(
    gold: &[InstanceSpans],
    pred: &[InstanceSpans],
) -> Result<EvalReport, EvalError> {
    let pairs = aligned(gold, pred)?;
    let mut report = EvalReport {
        instances: pairs.len(),
        unlabeled: true,
        ..Default::default()
    };
    for (g, p) in pairs {
        let bounds = |spans: &[ArgumentSpan]| {
            multiset(spans.iter().filter(|s| !s.is_verb()).map(|s| (s.start, s.end)))
        };
        let gm = bounds(g);
        let pm = bounds(p);
        let mut local = Counts::default();
        let keys: BTreeSet<_> = gm.keys().chain(pm.keys()).copied().collect();
        for key in keys {
            let gc = gm.get(&key).copied().unwrap_or(0);
            let pc = pm.get(&key).copied().unwrap_or(0);
            let hit = gc.min(pc);
            local += Counts {
                correct: hit,
                excess: pc - hit,
                missed: gc - hit,
            };
        }
        if local.excess == 0 && local.missed == 0 {
            report.perfect += 1;
        }
        report.overall += local;
    }
    Ok(report)
}

pub fn decompose(
    gold: &[InstanceSpans],
    pred: &[InstanceSpans],
) -> Result<ErrorDecomposition, EvalError> {
    Ok(ErrorDecomposition::from_reports(
        &score(gold, pred)?,
        &score_unlabeled(gold, pred)?,
    ))
}

/// `a - b` for overall scores and every label either report mentions.
pub fn compare(a: &EvalReport, b: &EvalReport) -> Delta {
    let labels: BTreeSet<&String> = a.per_label.keys().chain(b.per_label.keys()).collect();
    Delta {
        delta_f1: a.f1() - b.f1(),
        delta_precision: a.precision() - b.precision(),
        delta_recall: a.recall() - b.recall(),
        per_label: labels
            .into_iter()
            .map(|l| (l.clone(), a.label(l).f1() - b.label(l).f1()))
            .collect(),
    }
}

/// Gold spans of every instance, keyed by instance id.
pub fn corpus_spans(corpus: &Corpus) -> Vec<InstanceSpans> {
    corpus
        .instances
        .iter()
        .map(|i| (i.id(), i.spans().to_vec()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span(s: usize, e: usize, l: &str) -> ArgumentSpan {
        ArgumentSpan::new(s, e, l).unwrap()
    }

    fn one(spans: Vec<ArgumentSpan>) -> Vec<InstanceSpans> {
        vec![("1:0".into(), spans)]
    }

    #[test]
    fn identical_predictions() {
        let g = one(vec![span(0, 1, "A0"), span(2, 2, "V"), span(3, 4, "A1")]);
        let r = score(&g, &g).unwrap();
        assert_eq!(r.overall, Counts { correct: 2, excess: 0, missed: 0 });
        assert_eq!((r.precision(), r.recall(), r.f1()), (1.0, 1.0, 1.0));
        assert_eq!(r.label("V").correct, 1);
        assert_eq!(r.perfect, 1);
    }

    #[test]
    fn boundary_error_counts() {
        let g = one(vec![span(0, 1, "A0"), span(3, 5, "A1")]);
        let p = one(vec![span(0, 1, "A0"), span(3, 4, "A1")]);
        let r = score(&g, &p).unwrap();
        assert_eq!(r.overall, Counts { correct: 1, excess: 1, missed: 1 });
        assert_eq!((r.precision(), r.recall(), r.f1()), (0.5, 0.5, 0.5));
        let u = score_unlabeled(&g, &p).unwrap();
        assert_eq!(u.overall.correct, 1);
        assert!(u.per_label.is_empty());
    }

    #[test]
    fn unlabeled_ignores_label_permutation() {
        let g = one(vec![span(0, 0, "A0"), span(1, 1, "A1"), span(2, 2, "V")]);
        let p = one(vec![span(0, 0, "A1"), span(1, 1, "A0"), span(2, 2, "V")]);
        assert_eq!(score_unlabeled(&g, &p).unwrap().f1(), 1.0);
        assert_eq!(score(&g, &p).unwrap().f1(), 0.0);
        let d = decompose(&g, &p).unwrap();
        assert_eq!(d.arg_id_error, 0.0);
        assert_eq!(d.arg_class_error, d.total_error);
        assert_eq!(d.total_error, 1.0);
    }

    #[test]
    fn perfect_decomposition_is_zero() {
        let g = one(vec![span(0, 1, "A0")]);
        assert_eq!(decompose(&g, &g).unwrap(), ErrorDecomposition::default());
    }

    #[test]
    fn duplicate_gold_needs_duplicate_predictions() {
        let g = one(vec![span(0, 0, "A0"), span(0, 0, "A0")]);
        let p = one(vec![span(0, 0, "A0")]);
        let r = score(&g, &p).unwrap();
        assert_eq!(r.overall, Counts { correct: 1, excess: 0, missed: 1 });
    }

    #[test]
    fn empty_scores_zero() {
        let g = one(vec![]);
        let r = score(&g, &g).unwrap();
        assert_eq!(r.f1(), 0.0);
        assert_eq!(r.perfect, 1);
    }

    #[test]
    fn misaligned_ids() {
        let g = vec![("a".to_string(), vec![]), ("b".to_string(), vec![])];
        let p = vec![("a".to_string(), vec![]), ("c".to_string(), vec![])];
        assert_eq!(
            score(&g, &p).unwrap_err(),
            EvalError::Misaligned {
                gold_only: vec!["b".into()],
                pred_only: vec!["c".into()],
            }
        );
        let dup = vec![("a".to_string(), vec![]), ("a".to_string(), vec![])];
        assert!(matches!(score(&dup, &dup), Err(EvalError::DuplicateId(..))));
    }

    #[test]
    fn compare_reports() {
        let g = one(vec![span(0, 1, "A0"), span(3, 5, "A1")]);
        let p = one(vec![span(0, 1, "A0"), span(3, 4, "A1")]);
        let a = score(&g, &g).unwrap();
        let b = score(&g, &p).unwrap();
        let d = compare(&a, &a);
        assert!(d.per_label.values().all(|v| *v == 0.0) && d.delta_f1 == 0.0);
        let d = compare(&a, &b);
        assert_eq!(d.delta_f1, 0.5);
        assert_eq!(d.per_label["A0"], 0.0);
        assert_eq!(d.per_label["A1"], 1.0);
    }

    #[test]
    fn restricted_counts() {
        let g = one(vec![span(0, 0, "A0"), span(1, 1, "AM-TMP")]);
        let p = one(vec![span(0, 0, "A0"), span(1, 1, "AM-LOC")]);
        let r = score(&g, &p).unwrap();
        let tmp: BTreeSet<String> = ["AM-TMP".to_string()].into();
        assert_eq!(r.restricted(&tmp), Counts { correct: 0, excess: 0, missed: 1 });
    }
}
