use std::collections::BTreeSet;

use super::Corpus;

/// Dataset statistics in the shape of a corpus description table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Summary {
    pub instance_count: usize,
    /// Argument spans, not counting the `V` span.
    pub annotated_arg_count: usize,
    /// Distinct role labels other than `V` and `C-x`.
    pub role_count: usize,
}

pub fn summarize(corpus: &Corpus) -> Summary {
    let mut roles = BTreeSet::new();
    let mut args = 0;
    for span in corpus.instances.iter().flat_map(|i| i.spans()) {
        if span.is_verb() {
            continue;
        }
        args += 1;
        if !span.label.starts_with("C-") {
            roles.insert(span.label.as_str());
        }
    }
    Summary {
        instance_count: corpus.len(),
        annotated_arg_count: args,
        role_count: roles.len(),
    }
}
