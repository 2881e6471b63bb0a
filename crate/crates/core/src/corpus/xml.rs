//! Minimal XML corpus reader. The schema is documented in `docs/xml-schema.md`:
//!
//! ```xml
//! <corpus>
//!   <sentence id="s1">
//!     <token>Só</token> ...
//!     <predicate index="2" lemma="ganhar" flags="LATER">
//!       <argument start="3" end="3" label="A1"/>
//!     </predicate>
//!   </sentence>
//! </corpus>
//! ```
//!
//! Unknown elements are skipped with a warning. Instances whose offsets fall
//! outside their sentence are rejected and listed in the [`XmlReport`].

use std::collections::BTreeSet;
use std::io::BufRead;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{ArgumentSpan, Corpus, CorpusError, Instance};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct XmlReport {
    pub warnings: Vec<String>,
    /// `(instance id, reason)` for every rejected instance.
    pub rejected: Vec<(String, String)>,
}

struct PendingPredicate {
    index: Option<usize>,
    lemma: Option<String>,
    flags: BTreeSet<String>,
    args: Vec<Result<ArgumentSpan, String>>,
}

#[derive(Default)]
struct PendingSentence {
    id: String,
    tokens: Vec<String>,
    predicates: Vec<PendingPredicate>,
}

fn xml_err(reader_pos: u64, e: impl std::fmt::Display) -> CorpusError {
    CorpusError::Xml(format!("byte {reader_pos}: {e}"))
}

fn attr(e: &BytesStart<'_>, name: &str) -> Result<Option<String>, String> {
    match e.try_get_attribute(name) {
        Ok(Some(a)) => a
            .unescape_value()
            .map(|v| Some(v.trim().to_owned()))
            .map_err(|e| e.to_string()),
        Ok(None) => Ok(None),
        Err(e) => Err(e.to_string()),
    }
}

fn flags_of(e: &BytesStart<'_>) -> Result<BTreeSet<String>, String> {
    Ok(attr(e, "flags")?
        .map(|f| f.split_whitespace().map(str::to_owned).collect())
        .unwrap_or_default())
}

fn argument(e: &BytesStart<'_>) -> Result<ArgumentSpan, String> {
    let num = |name: &str| -> Result<usize, String> {
        let raw = attr(e, name)?.ok_or_else(|| format!("argument without {name}"))?;
        raw.parse()
            .map_err(|_| format!("argument {name}={raw:?} is not an offset"))
    };
    let start = num("start")?;
    let end = num("end")?;
    let label = attr(e, "label")?.ok_or("argument without label")?;
    ArgumentSpan::new(start, end, label).map_err(|e| e.to_string())
}

fn predicate(e: &BytesStart<'_>) -> Result<PendingPredicate, String> {
    let index = attr(e, "index")?
        .map(|raw| {
            raw.parse::<usize>()
                .map_err(|_| format!("predicate index {raw:?} is not an offset"))
        })
        .transpose()?;
    Ok(PendingPredicate {
        index,
        lemma: attr(e, "lemma")?,
        flags: flags_of(e)?,
        args: Vec::new(),
    })
}

pub fn parse_xml<R: BufRead>(input: R) -> Result<(Corpus, XmlReport), CorpusError> {
    let mut reader = Reader::from_reader(input);
    reader.config_mut().trim_text(true);
    let mut buf = Vec::new();
    let mut skip = Vec::new();
    let mut report = XmlReport::default();
    let mut instances = Vec::new();

    let mut sentence: Option<PendingSentence> = None;
    let mut in_token = false;
    let mut token_text = String::new();
    let mut ordinal = 0usize;

    loop {
        let pos = reader.buffer_position();
        let event = reader.read_event_into(&mut buf).map_err(|e| xml_err(pos, e))?;
        match event {
            Event::Eof => break,
            Event::Start(ref e) | Event::Empty(ref e) => {
                let empty = matches!(event, Event::Empty(_));
                let name = String::from_utf8_lossy(e.name().as_ref()).into_owned();
                match (name.as_str(), sentence.as_mut()) {
                    ("corpus", None) => {}
                    ("sentence", None) => {
                        ordinal += 1;
                        let id = attr(e, "id")
                            .map_err(|m| xml_err(pos, m))?
                            .unwrap_or_else(|| ordinal.to_string());
                        sentence = Some(PendingSentence {
                            id,
                            ..Default::default()
                        });
                        if empty {
                            sentence = None;
                        }
                    }
                    ("token", Some(_)) if !empty => {
                        in_token = true;
                        token_text.clear();
                    }
                    ("token", Some(s)) => s.tokens.push(String::new()),
                    ("predicate", Some(s)) => {
                        let p = predicate(e).unwrap_or_else(|m| PendingPredicate {
                            index: None,
                            lemma: None,
                            flags: BTreeSet::new(),
                            args: vec![Err(m)],
                        });
                        s.predicates.push(p);
                    }
                    ("argument", Some(s)) if !s.predicates.is_empty() => {
                        let arg = argument(e);
                        let pred = s.predicates.last_mut().expect("checked non-empty");
                        if let Ok(flags) = flags_of(e) {
                            pred.flags.extend(flags);
                        }
                        pred.args.push(arg);
                    }
                    _ => {
                        report
                            .warnings
                            .push(format!("byte {pos}: skipping unexpected element <{name}>"));
                        log::warn!("xml byte {pos}: skipping unexpected element <{name}>");
                        if !empty {
                            let end = e.to_end().into_owned();
                            reader
                                .read_to_end_into(end.name(), &mut skip)
                                .map_err(|e| xml_err(pos, e))?;
                        }
                    }
                }
            }
            Event::Text(t) => {
                if in_token {
                    let text = t.unescape().map_err(|e| xml_err(pos, e))?;
                    token_text.push_str(&text);
                }
            }
            Event::CData(t) => {
                if in_token {
                    token_text.push_str(&String::from_utf8_lossy(&t));
                }
            }
            Event::End(e) => match e.name().as_ref() {
                b"token" => {
                    if let Some(s) = sentence.as_mut() {
                        s.tokens.push(token_text.trim().to_owned());
                    }
                    in_token = false;
                }
                b"sentence" => {
                    if let Some(s) = sentence.take() {
                        finish_sentence(s, &mut instances, &mut report);
                    }
                }
                _ => {}
            },
            _ => {}
        }
        buf.clear();
    }
    if sentence.is_some() {
        return Err(CorpusError::Xml("document ends inside <sentence>".into()));
    }
    Ok((Corpus::new(instances), report))
}

fn finish_sentence(s: PendingSentence, out: &mut Vec<Instance>, report: &mut XmlReport) {
    let mut preds = s.predicates;
    preds.sort_by_key(|p| p.index);
    for p in preds {
        let id = match p.index {
            Some(i) => format!("{}:{}", s.id, i),
            None => format!("{}:?", s.id),
        };
        let Some(index) = p.index else {
            report.rejected.push((id, "predicate without index".into()));
            continue;
        };
        let mut spans = Vec::new();
        let mut failure = None;
        for arg in p.args {
            match arg {
                Ok(span) => spans.push(span),
                Err(m) => {
                    failure = Some(m);
                    break;
                }
            }
        }
        if let Some(reason) = failure {
            report.rejected.push((id, reason));
            continue;
        }
        spans.sort();
        let lemma = p
            .lemma
            .or_else(|| s.tokens.get(index).cloned())
            .unwrap_or_default();
        let inst = Instance {
            sentence_id: s.id.clone(),
            tokens: s.tokens.clone(),
            predicate_index: index,
            predicate_lemma: lemma,
            gold: Some(spans),
            flags: p.flags,
        };
        match inst.check() {
            Ok(()) => out.push(inst),
            Err(reason) => {
                log::warn!("rejecting instance {id}: {reason}");
                report.rejected.push((id, reason));
            }
        }
    }
}
