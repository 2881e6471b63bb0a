//! SRL corpora: instances, argument spans and the file formats they travel in.

mod conll;
mod preprocess;
mod summary;
mod xml;

pub use conll::{parse_conll, write_conll, write_conll_string};
pub use preprocess::{preprocess, ContractionLexicon, PreprocessReport, Rule, Rules};
pub use summary::{summarize, Summary};
pub use xml::{parse_xml, XmlReport};

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::tagging::{is_role_label, LabelSet, TaggingError};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("xml: {0}")]
    Xml(String),
    #[error("invalid span ({start},{end},{label:?})")]
    BadSpan {
        start: usize,
        end: usize,
        label: String,
    },
    #[error("instance {id}: {source}")]
    Instance {
        id: String,
        #[source]
        source: TaggingError,
    },
    #[error("instance {0} has no gold annotation")]
    MissingGold(String),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A labeled, inclusive token range.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArgumentSpan {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

impl ArgumentSpan {
    pub fn new(start: usize, end: usize, label: impl Into<String>) -> Result<Self, CorpusError> {
        let label = label.into();
        if start > end || !is_role_label(&label) {
            return Err(CorpusError::BadSpan { start, end, label });
        }
        Ok(ArgumentSpan { start, end, label })
    }

    pub(crate) fn new_unchecked(start: usize, end: usize, label: &str) -> Self {
        ArgumentSpan {
            start,
            end,
            label: label.to_owned(),
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, pos: usize) -> bool {
        self.start <= pos && pos <= self.end
    }

    pub fn is_verb(&self) -> bool {
        self.label == "V"
    }
}

impl fmt::Display for ArgumentSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.start, self.end, self.label)
    }
}

/// One sentence paired with one predicate position.
///
/// Gold annotation is held as spans. Overlapping spans are representable so
/// that raw XML input can be filtered by preprocessing; once a corpus is
/// clean, [`Instance::gold_tags`] yields the IOB encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub sentence_id: String,
    pub tokens: Vec<String>,
    pub predicate_index: usize,
    pub predicate_lemma: String,
    pub gold: Option<Vec<ArgumentSpan>>,
    /// Annotation flags such as `LATER`, kept for filtering.
    pub flags: BTreeSet<String>,
}

impl Instance {
    pub fn new(
        sentence_id: impl Into<String>,
        tokens: Vec<String>,
        predicate_index: usize,
        gold: Option<Vec<ArgumentSpan>>,
    ) -> Self {
        let predicate_lemma = tokens.get(predicate_index).cloned().unwrap_or_default();
        Instance {
            sentence_id: sentence_id.into(),
            tokens,
            predicate_index,
            predicate_lemma,
            gold,
            flags: BTreeSet::new(),
        }
    }

    /// Stable identifier: `<sentence id>:<predicate index>`.
    pub fn id(&self) -> String {
        format!("{}:{}", self.sentence_id, self.predicate_index)
    }

    pub fn spans(&self) -> &[ArgumentSpan] {
        self.gold.as_deref().unwrap_or(&[])
    }

    pub fn gold_tags(&self, labels: &LabelSet) -> Result<Vec<usize>, CorpusError> {
        let gold = self
            .gold
            .as_ref()
            .ok_or_else(|| CorpusError::MissingGold(self.id()))?;
        labels
            .spans_to_tags(gold, self.tokens.len())
            .map_err(|source| CorpusError::Instance {
                id: self.id(),
                source,
            })
    }

    /// Replaces the gold annotation with the spans read off an IOB sequence,
    /// repairing orphan `I-x` tags first. Returns the number of repaired tags.
    pub fn set_tags(&mut self, tags: &[usize], labels: &LabelSet) -> usize {
        let mut tags = tags.to_vec();
        let repaired = labels.repair(&mut tags);
        self.gold = Some(labels.tags_to_spans(&tags));
        repaired
    }

    pub(crate) fn check(&self) -> Result<(), String> {
        if self.tokens.is_empty() {
            return Err("sentence has no tokens".into());
        }
        if let Some(t) = self
            .tokens
            .iter()
            .find(|t| t.is_empty() || t.chars().any(char::is_whitespace))
        {
            return Err(format!("token {t:?} is empty or contains whitespace"));
        }
        if self.predicate_index >= self.tokens.len() {
            return Err(format!(
                "predicate index {} outside a sentence of {} tokens",
                self.predicate_index,
                self.tokens.len()
            ));
        }
        for span in self.spans() {
            if span.end >= self.tokens.len() {
                return Err(format!(
                    "argument {span} outside a sentence of {} tokens",
                    self.tokens.len()
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub instances: Vec<Instance>,
}

impl Corpus {
    pub fn new(instances: Vec<Instance>) -> Self {
        Corpus { instances }
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Every role label used by a gold span.
    pub fn label_inventory(&self) -> BTreeSet<String> {
        self.instances
            .iter()
            .flat_map(|i| i.spans().iter().map(|s| s.label.clone()))
            .collect()
    }

    /// Label set over the sorted inventory.
    pub fn label_set(&self) -> LabelSet {
        LabelSet::new(self.label_inventory()).expect("inventory holds validated role labels")
    }

    pub fn find(&self, id: &str) -> Option<&Instance> {
        self.instances.iter().find(|i| i.id() == id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_validation() {
        assert!(ArgumentSpan::new(2, 1, "A0").is_err());
        assert!(ArgumentSpan::new(0, 0, "").is_err());
        assert!(ArgumentSpan::new(0, 0, "B-A0").is_err());
        let s = ArgumentSpan::new(1, 3, "C-A1").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.to_string(), "(1,3,C-A1)");
    }

    #[test]
    fn instance_tags_and_inventory() {
        let toks = ["Só", "precisa", "ganhar", "experiência"]
            .map(String::from)
            .to_vec();
        let inst = Instance::new(
            "1",
            toks,
            2,
            Some(vec![
                ArgumentSpan::new(2, 2, "V").unwrap(),
                ArgumentSpan::new(3, 3, "A1").unwrap(),
            ]),
        );
        assert_eq!(inst.id(), "1:2");
        let corpus = Corpus::new(vec![inst.clone()]);
        let labels = corpus.label_set();
        assert_eq!(labels.roles(), ["A1", "V"]);
        let tags = inst.gold_tags(&labels).unwrap();
        let names: Vec<_> = tags.iter().map(|&t| labels.tag_name(t)).collect();
        assert_eq!(names, ["O", "O", "B-V", "B-A1"]);
    }

    #[test]
    fn set_tags_repairs() {
        let labels = LabelSet::new(["A0"]).unwrap();
        let mut inst = Instance::new("s", vec!["a".into(), "b".into(), "c".into()], 0, None);
        assert_eq!(inst.set_tags(&[2, 2, 0], &labels), 1);
        assert_eq!(inst.spans(), [ArgumentSpan::new(0, 1, "A0").unwrap()]);
    }
}
