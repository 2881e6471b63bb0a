//! CoNLL-2005 style column files.
//!
//! One token per line, blank line after each sentence. Column 1 is the surface
//! form, column 2 is `-` or the predicate lemma, and every further column holds
//! the bracketed arguments of one predicate, in predicate order:
//!
//! ```text
//! Só           -        *
//! precisa      -        *
//! ganhar       ganhar   (V*)
//! experiência  -        (A1*)
//! ```
//!
//! A sentence whose id differs from its 1-based position in the file is
//! preceded by a `# sent_id = <id>` line. The writer separates columns with a
//! single tab; the reader accepts any whitespace.

use std::io::{BufRead, Write};

use super::{ArgumentSpan, Corpus, CorpusError, Instance};
use crate::tagging::is_role_label;

const SENT_ID: &str = "# sent_id = ";

fn parse_err(line: usize, message: impl Into<String>) -> CorpusError {
    CorpusError::Parse {
        line,
        message: message.into(),
    }
}

struct Block {
    id: Option<String>,
    first_line: usize,
    rows: Vec<(usize, Vec<String>)>,
}

pub fn parse_conll<R: BufRead>(reader: R) -> Result<Corpus, CorpusError> {
    let mut instances = Vec::new();
    let mut block: Option<Block> = None;
    let mut ordinal = 0usize;

    let mut flush = |block: Block, instances: &mut Vec<Instance>| -> Result<(), CorpusError> {
        ordinal += 1;
        let id = block.id.clone().unwrap_or_else(|| ordinal.to_string());
        instances.extend(sentence_instances(&id, &block)?);
        Ok(())
    };

    for (n, line) in reader.lines().enumerate() {
        let n = n + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            if let Some(b) = block.take() {
                flush(b, &mut instances)?;
            }
            continue;
        }
        let current = block.get_or_insert_with(|| Block {
            id: None,
            first_line: n,
            rows: Vec::new(),
        });
        if let Some(rest) = line.strip_prefix("# ") {
            if !current.rows.is_empty() {
                return Err(parse_err(n, "comment inside a sentence"));
            }
            if let Some(id) = line.strip_prefix(SENT_ID) {
                let id = id.trim();
                if id.is_empty() || id.chars().any(char::is_whitespace) {
                    return Err(parse_err(n, format!("bad sentence id {id:?}")));
                }
                current.id = Some(id.to_owned());
            } else {
                log::debug!("line {n}: ignoring comment {rest:?}");
            }
            continue;
        }
        let cols: Vec<String> = line.split_whitespace().map(str::to_owned).collect();
        current.rows.push((n, cols));
    }
    if let Some(b) = block.take() {
        flush(b, &mut instances)?;
    }
    Ok(Corpus::new(instances))
}

fn sentence_instances(id: &str, block: &Block) -> Result<Vec<Instance>, CorpusError> {
    let Some((_, first)) = block.rows.first() else {
        return Ok(Vec::new());
    };
    let width = first.len();
    if width < 2 {
        return Err(parse_err(
            block.first_line,
            format!("expected at least 2 columns, found {width}"),
        ));
    }
    for (n, cols) in &block.rows {
        if cols.len() != width {
            return Err(parse_err(
                *n,
                format!("{} columns, sentence started with {width}", cols.len()),
            ));
        }
    }
    let tokens: Vec<String> = block.rows.iter().map(|(_, c)| c[0].clone()).collect();
    let predicates: Vec<usize> = block
        .rows
        .iter()
        .enumerate()
        .filter(|(_, (_, c))| c[1] != "-")
        .map(|(i, _)| i)
        .collect();
    if predicates.len() != width - 2 {
        return Err(parse_err(
            block.first_line,
            format!(
                "{} predicates marked but {} argument columns",
                predicates.len(),
                width - 2
            ),
        ));
    }

    let mut out = Vec::with_capacity(predicates.len());
    for (col, &pred) in predicates.iter().enumerate() {
        let mut spans = Vec::new();
        let mut open: Option<(usize, String, usize)> = None;
        for (pos, (n, cols)) in block.rows.iter().enumerate() {
            let cell = parse_cell(&cols[col + 2]).ok_or_else(|| {
                parse_err(*n, format!("malformed argument cell {:?}", cols[col + 2]))
            })?;
            if let Some(label) = cell.opens {
                if let Some((_, ref other, at)) = open {
                    return Err(parse_err(
                        *n,
                        format!("({label}* opened while ({other}* from line {at} is still open"),
                    ));
                }
                open = Some((pos, label.to_owned(), *n));
            }
            if cell.closes {
                let (start, label, _) = open
                    .take()
                    .ok_or_else(|| parse_err(*n, "*) closes no open argument"))?;
                spans.push(ArgumentSpan::new_unchecked(start, pos, &label));
            }
        }
        if let Some((_, label, at)) = open {
            return Err(parse_err(at, format!("({label}* never closed")));
        }
        out.push(Instance {
            sentence_id: id.to_owned(),
            tokens: tokens.clone(),
            predicate_index: pred,
            predicate_lemma: block.rows[pred].1[1].clone(),
            gold: Some(spans),
            flags: Default::default(),
        });
    }
    Ok(out)
}

struct Cell<'a> {
    opens: Option<&'a str>,
    closes: bool,
}

fn parse_cell(cell: &str) -> Option<Cell<'_>> {
    let (opens, rest) = match cell.strip_prefix('(') {
        Some(inner) => {
            let star = inner.find('*')?;
            let label = &inner[..star];
            if !is_role_label(label) || label.contains(['(', ')']) {
                return None;
            }
            (Some(label), &inner[star..])
        }
        None => (None, cell),
    };
    match rest {
        "*" => Some(Cell {
            opens,
            closes: false,
        }),
        "*)" => Some(Cell {
            opens,
            closes: true,
        }),
        _ => None,
    }
}

/// Writes the canonical column format. Consecutive instances of one sentence
/// with increasing predicate positions share a sentence block.
pub fn write_conll<W: Write>(mut out: W, corpus: &Corpus) -> Result<(), CorpusError> {
    let mut ordinal = 0usize;
    let mut rest = &corpus.instances[..];
    while let Some(head) = rest.first() {
        let mut len = 1;
        while len < rest.len() {
            let next = &rest[len];
            let prev = &rest[len - 1];
            if next.sentence_id != head.sentence_id
                || next.tokens != head.tokens
                || next.predicate_index <= prev.predicate_index
            {
                break;
            }
            len += 1;
        }
        let (group, tail) = rest.split_at(len);
        rest = tail;
        ordinal += 1;
        write_block(&mut out, ordinal, group)?;
    }
    Ok(())
}

pub fn write_conll_string(corpus: &Corpus) -> Result<String, CorpusError> {
    let mut buf = Vec::new();
    write_conll(&mut buf, corpus)?;
    Ok(String::from_utf8(buf).expect("writer emits UTF-8"))
}

fn write_block<W: Write>(out: &mut W, ordinal: usize, group: &[Instance]) -> Result<(), CorpusError> {
    let head = &group[0];
    if let Err(message) = head.check() {
        return Err(CorpusError::Config(format!("instance {}: {message}", head.id())));
    }
    let len = head.tokens.len();
    let mut columns = Vec::with_capacity(group.len());
    for inst in group {
        let gold = inst
            .gold
            .as_ref()
            .ok_or_else(|| CorpusError::MissingGold(inst.id()))?;
        if inst.predicate_lemma.is_empty()
            || inst.predicate_lemma == "-"
            || inst.predicate_lemma.chars().any(char::is_whitespace)
        {
            return Err(CorpusError::Config(format!(
                "instance {}: predicate lemma {:?} cannot be written",
                inst.id(),
                inst.predicate_lemma
            )));
        }
        let mut cells = vec![String::from("*"); len];
        let mut owner: Vec<Option<&ArgumentSpan>> = vec![None; len];
        for span in gold {
            if span.end >= len {
                return Err(CorpusError::Config(format!(
                    "instance {}: argument {span} outside the sentence",
                    inst.id()
                )));
            }
            for slot in &mut owner[span.start..=span.end] {
                if let Some(other) = *slot {
                    return Err(CorpusError::Instance {
                        id: inst.id(),
                        source: crate::tagging::TaggingError::Overlap(other.clone(), span.clone()),
                    });
                }
                *slot = Some(span);
            }
            if span.start == span.end {
                cells[span.start] = format!("({}*)", span.label);
            } else {
                cells[span.start] = format!("({}*", span.label);
                cells[span.end] = String::from("*)");
            }
        }
        columns.push(cells);
    }

    if head.sentence_id != ordinal.to_string() {
        writeln!(out, "{SENT_ID}{}", head.sentence_id)?;
    }
    for (pos, token) in head.tokens.iter().enumerate() {
        let marker = group
            .iter()
            .find(|i| i.predicate_index == pos)
            .map(|i| i.predicate_lemma.as_str())
            .unwrap_or("-");
        write!(out, "{token}\t{marker}")?;
        for col in &columns {
            write!(out, "\t{}", col[pos])?;
        }
        writeln!(out)?;
    }
    writeln!(out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: &str = "Só\t-\t*\nprecisa\t-\t*\nganhar\tganhar\t(V*)\nexperiência\t-\t(A1*)\n\n";

    fn span(s: usize, e: usize, l: &str) -> ArgumentSpan {
        ArgumentSpan::new(s, e, l).unwrap()
    }

    #[test]
    fn parses_single_predicate_sentence() {
        let corpus = parse_conll(FIG1.as_bytes()).unwrap();
        assert_eq!(corpus.len(), 1);
        let inst = &corpus.instances[0];
        assert_eq!(inst.predicate_index, 2);
        assert_eq!(inst.predicate_lemma, "ganhar");
        assert_eq!(inst.spans(), [span(2, 2, "V"), span(3, 3, "A1")]);
        assert_eq!(write_conll_string(&corpus).unwrap(), FIG1);
    }

    #[test]
    fn empty_props_column_gives_no_spans() {
        let text = "Chove\tchover\t*\n.\t-\t*\n\n";
        let corpus = parse_conll(text.as_bytes()).unwrap();
        assert_eq!(corpus.len(), 1);
        assert!(corpus.instances[0].spans().is_empty());
        assert_eq!(write_conll_string(&corpus).unwrap(), text);
    }

    #[test]
    fn multi_token_spans_and_several_predicates() {
        let text = "\
O\t-\t(A0*\t*
menino\t-\t*)\t*
quer\tquerer\t(V*)\t*
comer\tcomer\t(A1*\t(V*)
o\t-\t*\t(A1*
bolo\t-\t*)\t*)

";
        let corpus = parse_conll(text.as_bytes()).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(
            corpus.instances[0].spans(),
            [span(0, 1, "A0"), span(2, 2, "V"), span(3, 5, "A1")]
        );
        assert_eq!(corpus.instances[1].predicate_index, 3);
        assert_eq!(corpus.instances[1].spans(), [span(3, 3, "V"), span(4, 5, "A1")]);
        assert_eq!(write_conll_string(&corpus).unwrap(), text);
    }

    #[test]
    fn sentence_ids() {
        let text = "a\ta\t(V*)\n\n# sent_id = s7\nb\tb\t(V*)\n\n";
        let corpus = parse_conll(text.as_bytes()).unwrap();
        assert_eq!(corpus.instances[0].sentence_id, "1");
        assert_eq!(corpus.instances[1].sentence_id, "s7");
        assert_eq!(write_conll_string(&corpus).unwrap(), text);

        let head = Corpus::new(corpus.instances[..1].to_vec());
        assert_eq!(write_conll_string(&head).unwrap(), "a\ta\t(V*)\n\n");
        let tail = Corpus::new(corpus.instances[1..].to_vec());
        assert_eq!(
            write_conll_string(&tail).unwrap(),
            "# sent_id = s7\nb\tb\t(V*)\n\n"
        );
        let mut moved = Corpus::new(vec![corpus.instances[1].clone(), corpus.instances[0].clone()]);
        moved.instances[0].sentence_id = "x".into();
        assert_eq!(
            write_conll_string(&moved).unwrap(),
            "# sent_id = x\nb\tb\t(V*)\n\n# sent_id = 1\na\ta\t(V*)\n\n"
        );
    }

    #[test]
    fn malformed_brackets_report_line() {
        let nested = "a\t-\t(A0*\nb\tb\t(V*)\nc\t-\t*)\n";
        match parse_conll(nested.as_bytes()) {
            Err(CorpusError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        let stray = "a\ta\t(V*)\nb\t-\t*)\n";
        assert!(matches!(
            parse_conll(stray.as_bytes()),
            Err(CorpusError::Parse { line: 2, .. })
        ));
        let unclosed = "a\ta\t(V*)\nb\t-\t(A1*\n";
        assert!(matches!(
            parse_conll(unclosed.as_bytes()),
            Err(CorpusError::Parse { line: 2, .. })
        ));
        let garbage = "a\ta\t(V*)x\n";
        assert!(matches!(
            parse_conll(garbage.as_bytes()),
            Err(CorpusError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn column_mismatch_is_an_error() {
        let text = "a\ta\t(V*)\nb\t-\n";
        assert!(matches!(
            parse_conll(text.as_bytes()),
            Err(CorpusError::Parse { line: 2, .. })
        ));
        let missing_marker = "a\t-\t(V*)\n";
        assert!(matches!(
            parse_conll(missing_marker.as_bytes()),
            Err(CorpusError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn cell_grammar() {
        assert!(parse_cell("*").is_some());
        assert!(parse_cell("*)").is_some());
        assert_eq!(parse_cell("(AM-TMP*").unwrap().opens, Some("AM-TMP"));
        assert!(parse_cell("(R-A0*)").unwrap().closes);
        for bad in ["", "(*", "(A0", "A0*", "(A0*))", "**", "(B-A0*"] {
            assert!(parse_cell(bad).is_none(), "{bad}");
        }
    }

    #[test]
    fn writer_refuses_overlaps_and_missing_gold() {
        let mut inst = Instance::new(
            "1",
            vec!["a".into(), "b".into()],
            0,
            Some(vec![span(0, 1, "A0"), span(1, 1, "A1")]),
        );
        assert!(write_conll_string(&Corpus::new(vec![inst.clone()])).is_err());
        inst.gold = None;
        assert!(matches!(
            write_conll_string(&Corpus::new(vec![inst])),
            Err(CorpusError::MissingGold(_))
        ));
        assert_eq!(write_conll_string(&Corpus::default()).unwrap(), "");
    }
}
