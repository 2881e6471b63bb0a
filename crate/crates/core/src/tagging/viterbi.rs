use super::{LabelSet, Tag, TaggingError};

/// Rows of an emission matrix must exponentiate-sum to 1 within this bound.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-4;

/// Per-token log-probabilities over the tags of one [`LabelSet`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionMatrix {
    id: String,
    tokens: usize,
    tags: usize,
    scores: Vec<f64>,
}

impl EmissionMatrix {
    pub fn new(
        id: impl Into<String>,
        tags: usize,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, TaggingError> {
        let id = id.into();
        let tokens = rows.len();
        let mut scores = Vec::with_capacity(tokens * tags);
        for (row, values) in rows.into_iter().enumerate() {
            if values.len() != tags {
                return Err(TaggingError::RaggedRow {
                    id,
                    row,
                    expected: tags,
                    found: values.len(),
                });
            }
            if let Some(col) = values.iter().position(|v| !v.is_finite()) {
                return Err(TaggingError::NonFinite { id, row, col });
            }
            scores.extend(values);
        }
        Ok(EmissionMatrix {
            id,
            tokens,
            tags,
            scores,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tokens(&self) -> usize {
        self.tokens
    }

    pub fn tags(&self) -> usize {
        self.tags
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.scores[t * self.tags..(t + 1) * self.tags]
    }

    pub fn get(&self, t: usize, tag: usize) -> f64 {
        self.scores[t * self.tags + tag]
    }

    /// Index of the first row whose probabilities do not sum to 1.
    pub fn first_unnormalized_row(&self, tolerance: f64) -> Option<usize> {
        (0..self.tokens).find(|&t| {
            let mass: f64 = self.row(t).iter().map(|v| v.exp()).sum();
            (mass - 1.0).abs() > tolerance
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub tags: Vec<usize>,
    /// Sum of the chosen per-token scores, accumulated left to right.
    pub score: f64,
}

/// Best-scoring valid IOB sequence under additive per-token scores.
///
/// Transitions into `I-x` are only permitted from `B-x`/`I-x`; every other
/// transition is free. Among equal-scoring sequences the one with the lowest
/// tag index at the latest differing position wins.
pub fn viterbi_decode(
    emissions: &EmissionMatrix,
    labels: &LabelSet,
) -> Result<Decoded, TaggingError> {
    let width = labels.num_tags();
    if emissions.tags != width {
        return Err(TaggingError::WidthMismatch {
            id: emissions.id.clone(),
            expected: width,
            found: emissions.tags,
        });
    }
    if let Some(pos) = emissions.scores.iter().position(|v| !v.is_finite()) {
        return Err(TaggingError::NonFinite {
            id: emissions.id.clone(),
            row: pos / width,
            col: pos % width,
        });
    }
    let steps = emissions.tokens;
    if steps == 0 {
        return Ok(Decoded {
            tags: Vec::new(),
            score: 0.0,
        });
    }

    let mut best: Vec<f64> = (0..width)
        .map(|j| {
            if labels.allowed(None, j) {
                emissions.get(0, j)
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let mut next = vec![0.0; width];
    let mut back = vec![0u32; steps * width];

    for t in 1..steps {
        // free transitions all share the overall best predecessor
        let mut free_from = 0;
        for i in 1..width {
            if best[i] > best[free_from] {
                free_from = i;
            }
        }
        for j in 0..width {
            let from = match labels.tag(j) {
                Tag::Outside | Tag::Begin(_) => free_from,
                Tag::Inside(r) => {
                    let opener = labels.index(Tag::Begin(r));
                    let inner = labels.index(Tag::Inside(r));
                    if best[inner] > best[opener] {
                        inner
                    } else {
                        opener
                    }
                }
            };
            next[j] = best[from] + emissions.get(t, j);
            back[t * width + j] = from as u32;
        }
        std::mem::swap(&mut best, &mut next);
    }

    let mut last = 0;
    for j in 1..width {
        if best[j] > best[last] {
            last = j;
        }
    }
    let score = best[last];
    let mut tags = vec![0; steps];
    tags[steps - 1] = last;
    for t in (1..steps).rev() {
        tags[t - 1] = back[t * width + tags[t]] as usize;
    }
    Ok(Decoded { tags, score })
}
