//! IOB label space, sequence validity, span/tag conversion and constrained decoding.
//!
//! Tags are addressed by dense indices into a [`LabelSet`]. The layout is fixed:
//! `O` is index 0, and role `r` (in role order) owns `B-r` at `1 + 2r` and `I-r`
//! at `2 + 2r`.

mod emissions;
mod viterbi;

pub use emissions::{read_emissions, write_emissions, EmissionFile, EmissionFormatError};
pub use viterbi::{viterbi_decode, Decoded, EmissionMatrix, NORMALIZATION_TOLERANCE};

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::corpus::ArgumentSpan;

#[derive(Debug, Error, PartialEq)]
pub enum TaggingError {
    #[error("role label {0:?} is empty, contains whitespace or carries an IOB prefix")]
    BadRole(String),
    #[error("role {0:?} listed twice")]
    DuplicateRole(String),
    #[error("tag list is not in canonical order: expected {expected:?} at column {column}, found {found:?}")]
    NonCanonicalTags {
        column: usize,
        expected: String,
        found: String,
    },
    #[error("unknown role {0:?}")]
    UnknownRole(String),
    #[error("span {0} lies outside a sentence of {1} tokens")]
    SpanOutOfBounds(ArgumentSpan, usize),
    #[error("spans {0} and {1} overlap")]
    Overlap(ArgumentSpan, ArgumentSpan),
    #[error("emission matrix {id} has {found} columns but the label set has {expected} tags")]
    WidthMismatch {
        id: String,
        expected: usize,
        found: usize,
    },
    #[error("emission matrix {id}: row {row} has {found} entries, expected {expected}")]
    RaggedRow {
        id: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("emission matrix {id}: non-finite score at token {row}, tag {col}")]
    NonFinite { id: String, row: usize, col: usize },
}

/// A decoded tag, with roles referenced by their index in the owning [`LabelSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    Outside,
    Begin(usize),
    Inside(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    roles: Vec<String>,
    role_index: HashMap<String, usize>,
}

impl LabelSet {
    /// Builds a label set whose tag order follows the given role order.
    pub fn new<I, S>(roles: I) -> Result<Self, TaggingError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out = LabelSet {
            roles: Vec::new(),
            role_index: HashMap::new(),
        };
        for role in roles {
            let role = role.into();
            if !is_role_label(&role) {
                return Err(TaggingError::BadRole(role));
            }
            if out.role_index.contains_key(&role) {
                return Err(TaggingError::DuplicateRole(role));
            }
            out.role_index.insert(role.clone(), out.roles.len());
            out.roles.push(role);
        }
        Ok(out)
    }

    /// Rebuilds a label set from a full tag listing such as an emission file
    /// header. The listing must be exactly the canonical order for its roles.
    pub fn from_tag_names<S: AsRef<str>>(names: &[S]) -> Result<Self, TaggingError> {
        let roles = names
            .iter()
            .filter_map(|n| n.as_ref().strip_prefix("B-"))
            .map(str::to_owned)
            .collect::<Vec<_>>();
        let set = LabelSet::new(roles)?;
        let expected = set.tag_names();
        for (column, want) in expected.iter().enumerate() {
            let found = names.get(column).map(|n| n.as_ref()).unwrap_or("");
            if found != want {
                return Err(TaggingError::NonCanonicalTags {
                    column,
                    expected: want.clone(),
                    found: found.to_owned(),
                });
            }
        }
        if names.len() > expected.len() {
            return Err(TaggingError::NonCanonicalTags {
                column: expected.len(),
                expected: String::new(),
                found: names[expected.len()].as_ref().to_owned(),
            });
        }
        Ok(set)
    }

    pub fn roles(&self) -> &[String] {
        &self.roles
    }

    pub fn role_id(&self, role: &str) -> Option<usize> {
        self.role_index.get(role).copied()
    }

    pub fn num_tags(&self) -> usize {
        1 + 2 * self.roles.len()
    }

    pub fn tag(&self, index: usize) -> Tag {
        assert!(index < self.num_tags(), "tag index {index} out of range");
        match index {
            0 => Tag::Outside,
            i if i % 2 == 1 => Tag::Begin((i - 1) / 2),
            i => Tag::Inside((i - 2) / 2),
        }
    }

    pub fn index(&self, tag: Tag) -> usize {
        match tag {
            Tag::Outside => 0,
            Tag::Begin(r) => 1 + 2 * r,
            Tag::Inside(r) => 2 + 2 * r,
        }
    }

    pub fn tag_name(&self, index: usize) -> String {
        match self.tag(index) {
            Tag::Outside => "O".to_owned(),
            Tag::Begin(r) => format!("B-{}", self.roles[r]),
            Tag::Inside(r) => format!("I-{}", self.roles[r]),
        }
    }

    pub fn tag_names(&self) -> Vec<String> {
        (0..self.num_tags()).map(|i| self.tag_name(i)).collect()
    }

    pub fn parse_tag(&self, name: &str) -> Option<usize> {
        if name == "O" {
            return Some(0);
        }
        let (begin, role) = if let Some(r) = name.strip_prefix("B-") {
            (true, r)
        } else {
            (false, name.strip_prefix("I-")?)
        };
        let r = self.role_id(role)?;
        Some(if begin {
            self.index(Tag::Begin(r))
        } else {
            self.index(Tag::Inside(r))
        })
    }

    /// Transition mask. `prev = None` is the sequence start.
    pub fn allowed(&self, prev: Option<usize>, next: usize) -> bool {
        match self.tag(next) {
            Tag::Outside | Tag::Begin(_) => true,
            Tag::Inside(r) => match prev.map(|p| self.tag(p)) {
                Some(Tag::Begin(q)) | Some(Tag::Inside(q)) => q == r,
                _ => false,
            },
        }
    }

    /// True iff every `I-x` directly follows `B-x` or `I-x` and the sequence
    /// does not open with an `I-x`.
    pub fn is_valid(&self, seq: &[usize]) -> bool {
        let mut prev = None;
        for &t in seq {
            if t >= self.num_tags() || !self.allowed(prev, t) {
                return false;
            }
            prev = Some(t);
        }
        true
    }

    /// Promotes every orphan `I-x` to `B-x`; returns how many tags changed.
    pub fn repair(&self, seq: &mut [usize]) -> usize {
        let mut fixed = 0;
        let mut prev = None;
        for t in seq.iter_mut() {
            if !self.allowed(prev, *t) {
                if let Tag::Inside(r) = self.tag(*t) {
                    *t = self.index(Tag::Begin(r));
                    fixed += 1;
                }
            }
            prev = Some(*t);
        }
        fixed
    }

    /// Encodes disjoint spans as a valid tag sequence of the given length.
    pub fn spans_to_tags(
        &self,
        spans: &[ArgumentSpan],
        sentence_length: usize,
    ) -> Result<Vec<usize>, TaggingError> {
        let mut owner: Vec<Option<usize>> = vec![None; sentence_length];
        let mut tags = vec![0; sentence_length];
        for (k, span) in spans.iter().enumerate() {
            if span.end >= sentence_length {
                return Err(TaggingError::SpanOutOfBounds(span.clone(), sentence_length));
            }
            let role = self
                .role_id(&span.label)
                .ok_or_else(|| TaggingError::UnknownRole(span.label.clone()))?;
            for pos in span.start..=span.end {
                if let Some(other) = owner[pos] {
                    return Err(TaggingError::Overlap(spans[other].clone(), span.clone()));
                }
                owner[pos] = Some(k);
                tags[pos] = if pos == span.start {
                    self.index(Tag::Begin(role))
                } else {
                    self.index(Tag::Inside(role))
                };
            }
        }
        Ok(tags)
    }

    /// Reads spans off a tag sequence. Maximal `B-x I-x*` runs become one span;
    /// an `I-x` without a matching opener starts a new span, the same reading
    /// [`LabelSet::repair`] produces.
    pub fn tags_to_spans(&self, seq: &[usize]) -> Vec<ArgumentSpan> {
        let mut spans = Vec::new();
        let mut open: Option<(usize, usize)> = None;
        for (pos, &t) in seq.iter().enumerate() {
            let continues = match (self.tag(t), open) {
                (Tag::Inside(r), Some((_, q))) => r == q,
                _ => false,
            };
            if continues {
                continue;
            }
            if let Some((start, role)) = open.take() {
                spans.push(ArgumentSpan::new_unchecked(start, pos - 1, &self.roles[role]));
            }
            match self.tag(t) {
                Tag::Outside => {}
                Tag::Begin(r) | Tag::Inside(r) => open = Some((pos, r)),
            }
        }
        if let Some((start, role)) = open {
            spans.push(ArgumentSpan::new_unchecked(start, seq.len() - 1, &self.roles[role]));
        }
        spans
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag_names().join(" "))
    }
}

/// Role labels are non-empty, whitespace-free and not themselves IOB tags.
pub fn is_role_label(label: &str) -> bool {
    !label.is_empty()
        && label != "O"
        && !label.starts_with("B-")
        && !label.starts_with("I-")
        && !label.chars().any(char::is_whitespace)
}
