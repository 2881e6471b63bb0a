//! Line-oriented emission file: the boundary between a scoring model and the decoder.
//!
//! ```text
//! #labels<TAB>O<TAB>B-A0<TAB>I-A0 ...
//! #instance<TAB>ID<TAB>T
//! <T lines of tab-separated natural-log probabilities>
//!
//! #instance<TAB>...
//! ```

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::{EmissionMatrix, LabelSet, TaggingError, NORMALIZATION_TOLERANCE};

#[derive(Debug, Error)]
pub enum EmissionFormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Matrix {
        line: usize,
        #[source]
        source: TaggingError,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn syntax(line: usize, message: impl Into<String>) -> EmissionFormatError {
    EmissionFormatError::Syntax {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmissionFile {
    pub labels: LabelSet,
    pub instances: Vec<EmissionMatrix>,
}

impl EmissionFile {
    pub fn get(&self, id: &str) -> Option<&EmissionMatrix> {
        self.instances.iter().find(|m| m.id() == id)
    }
}

/// Parses and validates an emission file. Every row must be finite, have one
/// entry per tag and exponentiate-sum to 1 within [`NORMALIZATION_TOLERANCE`].
pub fn read_emissions<R: BufRead>(reader: R) -> Result<EmissionFile, EmissionFormatError> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (header_no, header) = loop {
        match lines.next() {
            Some((n, line)) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break (n, line);
                }
            }
            None => return Err(syntax(1, "missing #labels header")),
        }
    };
    let mut fields = header.split('\t');
    if fields.next() != Some("#labels") {
        return Err(syntax(header_no, "expected #labels header"));
    }
    let names: Vec<&str> = fields.collect();
    let labels = LabelSet::from_tag_names(&names).map_err(|source| EmissionFormatError::Matrix {
        line: header_no,
        source,
    })?;
    let width = labels.num_tags();

    let mut instances = Vec::new();
    while let Some((n, line)) = lines.next() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 3 || parts[0] != "#instance" {
            return Err(syntax(n, "expected #instance<TAB>ID<TAB>T"));
        }
        let id = parts[1];
        if id.is_empty() {
            return Err(syntax(n, "empty instance id"));
        }
        if instances.iter().any(|m: &EmissionMatrix| m.id() == id) {
            return Err(syntax(n, format!("duplicate instance id {id}")));
        }
        let tokens: usize = parts[2]
            .parse()
            .map_err(|_| syntax(n, format!("bad token count {:?}", parts[2])))?;
        let mut rows = Vec::with_capacity(tokens);
        for _ in 0..tokens {
            let (rn, row) = lines
                .next()
                .ok_or_else(|| syntax(n, format!("instance {id} ends before {tokens} rows")))?;
            let row = row?;
            let values = row
                .split('\t')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| syntax(rn, format!("bad score: {e}")))?;
            if values.len() != width {
                return Err(syntax(
                    rn,
                    format!("{} scores, expected {width}", values.len()),
                ));
            }
            rows.push(values);
        }
        let matrix = EmissionMatrix::new(id, width, rows)
            .map_err(|source| EmissionFormatError::Matrix { line: n, source })?;
        if let Some(row) = matrix.first_unnormalized_row(NORMALIZATION_TOLERANCE) {
            return Err(syntax(
                n + 1 + row,
                format!("row does not exponentiate-sum to 1 within {NORMALIZATION_TOLERANCE}"),
            ));
        }
        instances.push(matrix);
    }
    Ok(EmissionFile { labels, instances })
}

pub fn write_emissions<W: Write>(mut out: W, file: &EmissionFile) -> io::Result<()> {
    write!(out, "#labels")?;
    for name in file.labels.tag_names() {
        write!(out, "\t{name}")?;
    }
    writeln!(out)?;
    for (k, m) in file.instances.iter().enumerate() {
        if k > 0 {
            writeln!(out)?;
        }
        writeln!(out, "#instance\t{}\t{}", m.id(), m.tokens())?;
        for t in 0..m.tokens() {
            let row: Vec<String> = m.row(t).iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", row.join("\t"))?;
        }
    }
    Ok(())
}
