//! Corpus cleaning rules, always applied in this order:
//!
//! 1. `drop_multilabel`: remove instances in which a token carries two labels.
//! 2. `split_underscore`: `a_b` becomes two tokens; covering spans grow.
//! 3. `join_contractions`: re-join preposition contractions (`de` `o` → `do`).
//! 4. `drop_labels`: delete `AM-MED` and `AM-PIN` arguments.
//! 5. `drop_flagged`: remove instances flagged `WRONGSUBCORPUS`, `LATER` or `REEXAMINE`.
//! 6. `rechain_continuations`: fold a `C-x` span into the `x` span it touches.

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use super::{ArgumentSpan, Corpus, CorpusError, Instance};

const DEFAULT_LEXICON: &str = include_str!("../../data/contractions.tsv");

pub const DEFAULT_DROPPED_LABELS: [&str; 2] = ["AM-MED", "AM-PIN"];
pub const DEFAULT_EXCLUSION_FLAGS: [&str; 3] = ["WRONGSUBCORPUS", "LATER", "REEXAMINE"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    DropMultilabel,
    SplitUnderscore,
    JoinContractions,
    DropLabels,
    DropFlagged,
    RechainContinuations,
}

impl Rule {
    pub const ALL: [Rule; 6] = [
        Rule::DropMultilabel,
        Rule::SplitUnderscore,
        Rule::JoinContractions,
        Rule::DropLabels,
        Rule::DropFlagged,
        Rule::RechainContinuations,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::DropMultilabel => "drop_multilabel",
            Rule::SplitUnderscore => "split_underscore",
            Rule::JoinContractions => "join_contractions",
            Rule::DropLabels => "drop_labels",
            Rule::DropFlagged => "drop_flagged",
            Rule::RechainContinuations => "rechain_continuations",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rule::ALL
            .into_iter()
            .find(|r| r.name() == s.trim())
            .ok_or_else(|| CorpusError::Config(format!("unknown preprocessing rule {s:?}")))
    }
}

/// Maps `(first, second)` lower-cased token pairs to their joined form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionLexicon {
    pairs: HashMap<(String, String), String>,
}

impl ContractionLexicon {
    /// Tab-separated `first second joined` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let mut pairs = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            if cols.len() != 3 || cols.iter().any(|c| c.is_empty()) {
                return Err(CorpusError::Parse {
                    line: n + 1,
                    message: "contraction entries need exactly 3 tab-separated columns".into(),
                });
            }
            pairs.insert(
                (cols[0].to_lowercase(), cols[1].to_lowercase()),
                cols[2].to_owned(),
            );
        }
        Ok(ContractionLexicon { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn join(&self, first: &str, second: &str) -> Option<String> {
        let joined = self
            .pairs
            .get(&(first.to_lowercase(), second.to_lowercase()))?;
        let mut chars = first.chars();
        Some(match chars.next() {
            Some(c) if c.is_uppercase() => {
                let mut rest = joined.chars();
                let head: String = rest.next().map(|h| h.to_uppercase().collect()).unwrap_or_default();
                head + rest.as_str()
            }
            _ => joined.clone(),
        })
    }
}

impl Default for ContractionLexicon {
    fn default() -> Self {
        ContractionLexicon::parse(DEFAULT_LEXICON).expect("bundled lexicon parses")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rules {
    pub enabled: BTreeSet<Rule>,
    pub lexicon: ContractionLexicon,
    pub dropped_labels: BTreeSet<String>,
    pub exclusion_flags: BTreeSet<String>,
}

impl Rules {
    pub fn new(enabled: impl IntoIterator<Item = Rule>) -> Self {
        Rules {
            enabled: enabled.into_iter().collect(),
            lexicon: ContractionLexicon::default(),
            dropped_labels: DEFAULT_DROPPED_LABELS.map(String::from).into(),
            exclusion_flags: DEFAULT_EXCLUSION_FLAGS.map(String::from).into(),
        }
    }

    pub fn all() -> Self {
        Rules::new(Rule::ALL)
    }

    /// Comma-separated rule names, or `all`.
    pub fn from_list(list: &str) -> Result<Self, CorpusError> {
        if list.trim() == "all" {
            return Ok(Rules::all());
        }
        let rules = list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Rule>, _>>()?;
        Ok(Rules::new(rules))
    }

    fn on(&self, rule: Rule) -> bool {
        self.enabled.contains(&rule)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PreprocessReport {
    pub instances_in: usize,
    pub instances_out: usize,
    pub multilabel_instances_dropped: usize,
    /// Counted per instance, so a token shared by three predicates counts three times.
    pub tokens_split: usize,
    pub contractions_joined: usize,
    pub contraction_rejections: usize,
    pub spans_dropped: usize,
    pub flagged_instances_dropped: usize,
    pub continuations_rechained: usize,
    pub rejected: Vec<(String, String)>,
}

impl PreprocessReport {
    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        let rows = [
            ("instances_in", self.instances_in),
            ("instances_out", self.instances_out),
            ("multilabel_instances_dropped", self.multilabel_instances_dropped),
            ("tokens_split", self.tokens_split),
            ("contractions_joined", self.contractions_joined),
            ("contraction_rejections", self.contraction_rejections),
            ("spans_dropped", self.spans_dropped),
            ("flagged_instances_dropped", self.flagged_instances_dropped),
            ("continuations_rechained", self.continuations_rechained),
        ];
        for (k, v) in rows {
            writeln!(s, "{k}={v}").unwrap();
        }
        for (id, reason) in &self.rejected {
            writeln!(s, "rejected.{id}={reason}").unwrap();
        }
        s
    }

    /// True when no rule touched anything.
    pub fn is_clean(&self) -> bool {
        self.multilabel_instances_dropped == 0
            && self.tokens_split == 0
            && self.contractions_joined == 0
            && self.contraction_rejections == 0
            && self.spans_dropped == 0
            && self.flagged_instances_dropped == 0
            && self.continuations_rechained == 0
    }
}

pub fn preprocess(corpus: &Corpus, rules: &Rules) -> (Corpus, PreprocessReport) {
    let mut report = PreprocessReport {
        instances_in: corpus.len(),
        ..Default::default()
    };
    let mut out = Vec::with_capacity(corpus.len());
    for inst in &corpus.instances {
        let mut inst = inst.clone();
        if rules.on(Rule::DropMultilabel) && has_multilabel_token(&inst) {
            report.multilabel_instances_dropped += 1;
            continue;
        }
        if rules.on(Rule::SplitUnderscore) {
            report.tokens_split += split_underscores(&mut inst);
        }
        if rules.on(Rule::JoinContractions) {
            match join_contractions(&mut inst, &rules.lexicon) {
                Ok(n) => report.contractions_joined += n,
                Err(reason) => {
                    report.contraction_rejections += 1;
                    report.rejected.push((inst.id(), reason));
                    continue;
                }
            }
        }
        if rules.on(Rule::DropLabels) {
            report.spans_dropped += drop_labels(&mut inst, &rules.dropped_labels);
        }
        if rules.on(Rule::DropFlagged) && !inst.flags.is_disjoint(&rules.exclusion_flags) {
            report.flagged_instances_dropped += 1;
            continue;
        }
        if rules.on(Rule::RechainContinuations) {
            report.continuations_rechained += rechain(&mut inst);
        }
        out.push(inst);
    }
    report.instances_out = out.len();
    (Corpus::new(out), report)
}

fn has_multilabel_token(inst: &Instance) -> bool {
    let mut covered = vec![0u32; inst.tokens.len()];
    for span in inst.spans() {
        let last = span.end.min(inst.tokens.len().saturating_sub(1));
        for count in covered.iter_mut().take(last + 1).skip(span.start) {
            *count += 1;
            if *count > 1 {
                return true;
            }
        }
    }
    false
}

fn split_underscores(inst: &mut Instance) -> usize {
    let mut tokens = Vec::with_capacity(inst.tokens.len());
    // old index -> (first, last) new index
    let mut map = Vec::with_capacity(inst.tokens.len());
    let mut split = 0;
    for tok in &inst.tokens {
        let pieces: Vec<&str> = tok.split('_').filter(|p| !p.is_empty()).collect();
        let first = tokens.len();
        if pieces.len() > 1 {
            split += 1;
            tokens.extend(pieces.into_iter().map(str::to_owned));
        } else if pieces.len() == 1 && tok.contains('_') {
            split += 1;
            tokens.push(pieces[0].to_owned());
        } else {
            tokens.push(tok.clone());
        }
        map.push((first, tokens.len() - 1));
    }
    if split == 0 {
        return 0;
    }
    if let Some(pos) = map.get(inst.predicate_index) {
        inst.predicate_index = pos.0;
    }
    if let Some(gold) = inst.gold.as_mut() {
        for span in gold.iter_mut() {
            span.start = map[span.start].0;
            span.end = map[span.end].1;
        }
    }
    inst.tokens = tokens;
    split
}

fn join_contractions(inst: &mut Instance, lexicon: &ContractionLexicon) -> Result<usize, String> {
    let owner = |pos: usize| inst.spans().iter().position(|s| s.contains(pos));
    let mut tokens = Vec::with_capacity(inst.tokens.len());
    let mut map = Vec::with_capacity(inst.tokens.len());
    let mut joined = 0;
    let mut i = 0;
    while i < inst.tokens.len() {
        let merged = inst
            .tokens
            .get(i + 1)
            .and_then(|next| lexicon.join(&inst.tokens[i], next));
        match merged {
            Some(word) => {
                if owner(i) != owner(i + 1) {
                    return Err(format!(
                        "contraction {} {} crosses an argument boundary",
                        inst.tokens[i],
                        inst.tokens[i + 1]
                    ));
                }
                map.push(tokens.len());
                map.push(tokens.len());
                tokens.push(word);
                joined += 1;
                i += 2;
            }
            None => {
                map.push(tokens.len());
                tokens.push(inst.tokens[i].clone());
                i += 1;
            }
        }
    }
    if joined == 0 {
        return Ok(0);
    }
    inst.predicate_index = map[inst.predicate_index];
    if let Some(gold) = inst.gold.as_mut() {
        for span in gold.iter_mut() {
            span.start = map[span.start];
            span.end = map[span.end];
        }
    }
    inst.tokens = tokens;
    Ok(joined)
}

fn drop_labels(inst: &mut Instance, labels: &BTreeSet<String>) -> usize {
    let Some(gold) = inst.gold.as_mut() else {
        return 0;
    };
    let before = gold.len();
    gold.retain(|s| {
        let base = s
            .label
            .strip_prefix("C-")
            .or_else(|| s.label.strip_prefix("R-"))
            .unwrap_or(&s.label);
        !labels.contains(base)
    });
    before - gold.len()
}

fn rechain(inst: &mut Instance) -> usize {
    let Some(gold) = inst.gold.as_mut() else {
        return 0;
    };
    gold.sort();
    let mut merged: Vec<ArgumentSpan> = Vec::with_capacity(gold.len());
    let mut count = 0;
    for span in gold.drain(..) {
        if let Some(base) = span.label.strip_prefix("C-") {
            let touching = merged.iter_mut().find(|m| {
                m.end + 1 == span.start && (m.label == base || m.label == span.label)
            });
            if let Some(target) = touching {
                target.end = span.end;
                count += 1;
                continue;
            }
        }
        merged.push(span);
    }
    *gold = merged;
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span(s: usize, e: usize, l: &str) -> ArgumentSpan {
        ArgumentSpan::new(s, e, l).unwrap()
    }

    fn inst(tokens: &str, pred: usize, spans: Vec<ArgumentSpan>) -> Instance {
        Instance::new(
            "1",
            tokens.split(' ').map(String::from).collect(),
            pred,
            Some(spans),
        )
    }

    fn only(rule: Rule, i: Instance) -> (Corpus, PreprocessReport) {
        preprocess(&Corpus::new(vec![i]), &Rules::new([rule]))
    }

    #[test]
    fn rule_names_round_trip() {
        for r in Rule::ALL {
            assert_eq!(r.name().parse::<Rule>().unwrap(), r);
        }
        assert!("drop_everything".parse::<Rule>().is_err());
        assert_eq!(Rules::from_list("all").unwrap().enabled.len(), 6);
        let two = Rules::from_list("split_underscore,drop_labels").unwrap();
        assert_eq!(two.enabled.len(), 2);
    }

    #[test]
    fn identity_on_clean_input() {
        let i = inst("Ele correu", 1, vec![span(0, 0, "A0"), span(1, 1, "V")]);
        let corpus = Corpus::new(vec![i]);
        let (out, report) = preprocess(&corpus, &Rules::all());
        assert_eq!(out, corpus);
        assert!(report.is_clean());
        assert_eq!(report.instances_out, 1);
    }

    #[test]
    fn multilabel_instances_are_removed() {
        let i = inst("a b c", 0, vec![span(0, 0, "V"), span(1, 2, "A1"), span(2, 2, "A2")]);
        let (out, report) = only(Rule::DropMultilabel, i);
        assert!(out.is_empty());
        assert_eq!(report.multilabel_instances_dropped, 1);
    }

    #[test]
    fn underscore_split_extends_spans() {
        let i = inst(
            "Banco_do_Brasil lucrou em_torno_de mil",
            1,
            vec![span(0, 0, "A0"), span(1, 1, "V"), span(2, 3, "A1")],
        );
        let (out, report) = only(Rule::SplitUnderscore, i);
        let got = &out.instances[0];
        assert_eq!(report.tokens_split, 2);
        assert_eq!(
            got.tokens,
            ["Banco", "do", "Brasil", "lucrou", "em", "torno", "de", "mil"]
        );
        assert_eq!(got.predicate_index, 3);
        assert_eq!(got.spans(), [span(0, 2, "A0"), span(3, 3, "V"), span(4, 7, "A1")]);
    }

    #[test]
    fn underscore_edge_cases() {
        let i = inst("_ a_ b", 2, vec![span(2, 2, "V")]);
        let (out, report) = only(Rule::SplitUnderscore, i);
        assert_eq!(out.instances[0].tokens, ["_", "a", "b"]);
        assert_eq!(report.tokens_split, 1);
    }

    #[test]
    fn contractions_join_inside_spans() {
        let i = inst(
            "Gosta de o bolo De a avó",
            0,
            vec![span(0, 0, "V"), span(1, 3, "A1"), span(4, 6, "A2")],
        );
        let (out, report) = only(Rule::JoinContractions, i);
        let got = &out.instances[0];
        assert_eq!(report.contractions_joined, 2);
        assert_eq!(got.tokens, ["Gosta", "do", "bolo", "Da", "avó"]);
        assert_eq!(got.spans(), [span(0, 0, "V"), span(1, 2, "A1"), span(3, 4, "A2")]);
    }

    #[test]
    fn contraction_across_boundary_rejects_instance() {
        let i = inst("saiu de o", 0, vec![span(0, 0, "V"), span(1, 1, "AM-DIR")]);
        let (out, report) = only(Rule::JoinContractions, i);
        assert!(out.is_empty());
        assert_eq!(report.contraction_rejections, 1);
        assert_eq!(report.rejected[0].0, "1:0");
    }

    #[test]
    fn dropped_labels_include_prefixed_forms() {
        let i = inst(
            "a b c d",
            0,
            vec![span(0, 0, "V"), span(1, 1, "AM-MED"), span(2, 2, "C-AM-PIN"), span(3, 3, "A1")],
        );
        let (out, report) = only(Rule::DropLabels, i);
        assert_eq!(report.spans_dropped, 2);
        assert_eq!(out.instances[0].spans(), [span(0, 0, "V"), span(3, 3, "A1")]);
    }

    #[test]
    fn flagged_instances_removed() {
        let mut i = inst("a", 0, vec![span(0, 0, "V")]);
        i.flags.insert("REEXAMINE".into());
        let (out, report) = only(Rule::DropFlagged, i.clone());
        assert!(out.is_empty());
        assert_eq!(report.flagged_instances_dropped, 1);
        i.flags = ["OTHER".to_string()].into();
        assert_eq!(only(Rule::DropFlagged, i).0.len(), 1);
    }

    #[test]
    fn contiguous_continuations_rechain() {
        let i = inst("a b c d e", 4, vec![span(0, 2, "A0"), span(3, 3, "C-A0"), span(4, 4, "V")]);
        let (out, report) = only(Rule::RechainContinuations, i);
        assert_eq!(report.continuations_rechained, 1);
        assert_eq!(out.instances[0].spans(), [span(0, 3, "A0"), span(4, 4, "V")]);

        let chain = inst(
            "a b c d e f",
            2,
            vec![span(0, 0, "A1"), span(1, 1, "C-A1"), span(2, 2, "V"), span(3, 3, "C-A1"), span(4, 5, "C-A1")],
        );
        let (out, report) = only(Rule::RechainContinuations, chain);
        assert_eq!(report.continuations_rechained, 2);
        assert_eq!(
            out.instances[0].spans(),
            [span(0, 1, "A1"), span(2, 2, "V"), span(3, 5, "C-A1")]
        );
    }

    #[test]
    fn lexicon_parsing_and_case() {
        let lex = ContractionLexicon::default();
        assert!(lex.len() > 40);
        assert_eq!(lex.join("em", "a").as_deref(), Some("na"));
        assert_eq!(lex.join("A", "o").as_deref(), Some("Ao"));
        assert_eq!(lex.join("de", "de"), None);
        assert!(ContractionLexicon::parse("de\to\n").is_err());
        assert!(ContractionLexicon::parse("# nothing\n\n").unwrap().is_empty());
    }

    #[test]
    fn report_key_values() {
        let report = PreprocessReport {
            instances_in: 3,
            instances_out: 2,
            rejected: vec![("s:1".into(), "why".into())],
            ..Default::default()
        };
        let kv = report.to_key_values();
        assert!(kv.starts_with("instances_in=3\ninstances_out=2\n"));
        assert!(kv.ends_with("rejected.s:1=why\n"));
    }
}
