//! Generators and reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use srl_core::corpus::{ArgumentSpan, Corpus, Instance};
use srl_core::tagging::{EmissionMatrix, LabelSet};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// A label set with `(width - 1) / 2` roles.
pub fn label_set(width: usize) -> LabelSet {
    assert!(width % 2 == 1);
    LabelSet::new((0..(width - 1) / 2).map(|r| format!("A{r}"))).unwrap()
}

/// Entries on a 1/8 grid, so every path sum is exact and ties are frequent.
pub fn grid_matrix(rng: &mut StdRng, tokens: usize, width: usize) -> EmissionMatrix {
    let rows = (0..tokens)
        .map(|_| (0..width).map(|_| -(rng.random_range(0..24) as f64) / 8.0).collect())
        .collect();
    EmissionMatrix::new("grid", width, rows).unwrap()
}

/// Rows of natural-log probabilities from a random distribution.
pub fn logprob_matrix(rng: &mut StdRng, tokens: usize, width: usize) -> EmissionMatrix {
    let rows = (0..tokens)
        .map(|_| {
            let w: Vec<f64> = (0..width).map(|_| rng.random::<f64>().powi(3) + 1e-9).collect();
            let z: f64 = w.iter().sum();
            w.iter().map(|x| (x / z).ln()).collect()
        })
        .collect();
    EmissionMatrix::new("logprob", width, rows).unwrap()
}

/// Wide-range scores, including large magnitudes.
pub fn wild_matrix(rng: &mut StdRng, tokens: usize, width: usize) -> EmissionMatrix {
    let rows = (0..tokens)
        .map(|_| {
            (0..width)
                .map(|_| match rng.random_range(0..4) {
                    0 => rng.random_range(-1e6..1e6),
                    1 => 0.0,
                    _ => rng.random_range(-30.0..5.0),
                })
                .collect()
        })
        .collect();
    EmissionMatrix::new("wild", width, rows).unwrap()
}

/// True when `a` precedes `b` under the decoder's tie-break: lower tag at the
/// last position where they differ.
pub fn tie_break_less(a: &[usize], b: &[usize]) -> bool {
    a.iter().rev().cmp(b.iter().rev()) == std::cmp::Ordering::Less
}

/// Exhaustive search over every valid tag sequence. Path scores are summed
/// left to right, like the decoder.
pub fn brute_force(em: &EmissionMatrix, labels: &LabelSet) -> (Vec<usize>, f64) {
    let t = em.tokens();
    let width = labels.num_tags();
    if t == 0 {
        return (Vec::new(), 0.0);
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut seq = vec![0usize; t];
    loop {
        if labels.is_valid(&seq) {
            let mut s = em.get(0, seq[0]);
            for (i, &tag) in seq.iter().enumerate().skip(1) {
                s += em.get(i, tag);
            }
            let better = match &best {
                None => true,
                Some((b, bs)) => s > *bs || (s == *bs && tie_break_less(&seq, b)),
            };
            if better {
                best = Some((seq.clone(), s));
            }
        }
        let mut pos = 0;
        loop {
            if pos == t {
                return best.expect("all-O is always valid");
            }
            seq[pos] += 1;
            if seq[pos] < width {
                break;
            }
            seq[pos] = 0;
            pos += 1;
        }
    }
}

pub const WORDS: &[&str] = &[
    "o", "menino", "comeu", "bolo", "ontem", "a", "casa", "de", "Maria", "vendeu", "carro",
    "para", "João", "em", "Lisboa", "porque", "queria", "viajar", "não", "sabe", "se", "chove",
    "amanhã", "muito", "bem",
];

pub const LABELS: &[&str] = &[
    "A0", "A1", "A2", "A3", "A4", "AM-TMP", "AM-LOC", "AM-NEG", "AM-MNR", "AM-ADV", "AM-DIS",
    "AM-CAU", "C-A1", "R-A0", "R-A1",
];

/// Disjoint spans over `len` tokens, always including `(V*)` at `pred`.
pub fn random_spans(rng: &mut StdRng, len: usize, pred: usize, density: f64) -> Vec<ArgumentSpan> {
    let mut spans = vec![ArgumentSpan::new(pred, pred, "V").unwrap()];
    let mut pos = 0;
    while pos < len {
        if pos == pred || !rng.random_bool(density) {
            pos += 1;
            continue;
        }
        let limit = if pos < pred { pred } else { len };
        let end = (pos + rng.random_range(0..4)).min(limit - 1);
        let label = LABELS[rng.random_range(0..LABELS.len())];
        spans.push(ArgumentSpan::new(pos, end, label).unwrap());
        pos = end + 1;
    }
    spans.sort();
    spans
}

/// Sentences of 1..=`max_len` tokens with 1..=3 predicates each. Ids are the
/// 1-based sentence position unless `named` is set.
pub fn random_corpus(rng: &mut StdRng, sentences: usize, max_len: usize, named: bool) -> Corpus {
    let mut instances = Vec::new();
    for s in 0..sentences {
        let len = rng.random_range(1..=max_len);
        let tokens: Vec<String> = (0..len)
            .map(|_| WORDS[rng.random_range(0..WORDS.len())].to_owned())
            .collect();
        let id = if named && rng.random_bool(0.5) {
            format!("doc{}-s{}", rng.random_range(0..5), s)
        } else {
            (s + 1).to_string()
        };
        let mut preds: Vec<usize> = (0..rng.random_range(1..=3.min(len)))
            .map(|_| rng.random_range(0..len))
            .collect();
        preds.sort_unstable();
        preds.dedup();
        for p in preds {
            let spans = random_spans(rng, len, p, 0.35);
            let mut inst = Instance::new(id.clone(), tokens.clone(), p, Some(spans));
            inst.predicate_lemma = format!("{}r", tokens[p].to_lowercase());
            instances.push(inst);
        }
    }
    Corpus::new(instances)
}

/// `n` single-predicate instances whose argument labels are drawn from a
/// Zipf(1) distribution over `roles` labels.
pub fn zipf_corpus(rng: &mut StdRng, n: usize, roles: usize) -> Corpus {
    let names: Vec<String> = (0..roles).map(|r| format!("R{r:02}")).collect();
    let weights: Vec<f64> = (1..=roles).map(|r| 1.0 / r as f64).collect();
    let total: f64 = weights.iter().sum();
    let draw = |rng: &mut StdRng| {
        let mut u = rng.random::<f64>() * total;
        for (i, w) in weights.iter().enumerate() {
            if u < *w {
                return i;
            }
            u -= w;
        }
        roles - 1
    };
    let instances = (0..n)
        .map(|i| {
            let args = rng.random_range(0..=4);
            let len = args + 1;
            let mut spans = vec![ArgumentSpan::new(0, 0, "V").unwrap()];
            for a in 0..args {
                spans.push(ArgumentSpan::new(a + 1, a + 1, names[draw(rng)].as_str()).unwrap());
            }
            let tokens = (0..len).map(|t| format!("w{t}")).collect();
            Instance::new(format!("z{i}"), tokens, 0, Some(spans))
        })
        .collect();
    Corpus::new(instances)
}

/// Sentences built from a fixed template, so labels are predictable from the
/// word and its distance to the predicate:
/// `[det noun]A0 [não]AM-NEG? [verb]V [det noun]A1 [ontem]AM-TMP?`.
pub fn patterned_corpus(rng: &mut StdRng, sentences: usize) -> Corpus {
    const DETS: &[&str] = &["o", "a", "um", "uma", "este"];
    const NOUNS: &[&str] = &["menino", "casa", "bolo", "carro", "livro", "cidade", "mesa", "gato"];
    const VERBS: &[(&str, &str)] = &[
        ("comeu", "comer"),
        ("vendeu", "vender"),
        ("leu", "ler"),
        ("viu", "ver"),
        ("comprou", "comprar"),
    ];
    const TIMES: &[&str] = &["ontem", "hoje", "cedo"];
    let pick = |rng: &mut StdRng, xs: &[&'static str]| xs[rng.random_range(0..xs.len())].to_owned();
    let mut instances = Vec::new();
    for s in 0..sentences {
        let mut tokens = vec![pick(rng, DETS), pick(rng, NOUNS)];
        let mut spans = vec![ArgumentSpan::new(0, 1, "A0").unwrap()];
        if rng.random_bool(0.2) {
            spans.push(ArgumentSpan::new(tokens.len(), tokens.len(), "AM-NEG").unwrap());
            tokens.push("não".into());
        }
        let pred = tokens.len();
        let (verb, lemma) = VERBS[rng.random_range(0..VERBS.len())];
        tokens.push(verb.into());
        spans.push(ArgumentSpan::new(pred, pred, "V").unwrap());
        spans.push(ArgumentSpan::new(pred + 1, pred + 2, "A1").unwrap());
        tokens.push(pick(rng, DETS));
        tokens.push(pick(rng, NOUNS));
        if rng.random_bool(0.4) {
            spans.push(ArgumentSpan::new(tokens.len(), tokens.len(), "AM-TMP").unwrap());
            tokens.push(pick(rng, TIMES));
        }
        spans.sort();
        let mut inst = Instance::new((s + 1).to_string(), tokens, pred, Some(spans));
        inst.predicate_lemma = lemma.into();
        instances.push(inst);
    }
    Corpus::new(instances)
}
