//! Column corpus format and the timex-attribute sidecar.
//!
//! ```text
//! #doc <id> <DCT>
//! #text\t<raw text, with \\ \n \t \r escaped>      (optional)
//! surface\tchar_start\tchar_end\tpos\tlemma\tchunk\tpnp[\textra...]\tlabel
//! <blank line ends a sentence>
//! ```
//!
//! Missing annotations and unknown labels are written as `_`. Lines may carry
//! extra pass-through columns between `pnp` and `label`; every token line of a
//! document must have the same column count.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{Annotations, CharSpan, Document, Label, Sequence, Token};
use crate::error::{Error, Result};
use crate::normalizer::{Anchor, TimexType};

const BASE_COLUMNS: usize = 8;

pub fn read_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text)
}

pub fn write_corpus(docs: &[Document], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_corpus(docs)).map_err(|e| Error::io(path, e))
}

pub fn format_corpus(docs: &[Document]) -> String {
    let mut out = String::new();
    for doc in docs {
        let _ = writeln!(out, "#doc {} {}", doc.id, doc.dct);
        let _ = writeln!(out, "#text\t{}", escape(&doc.raw_text));
        for seq in &doc.sequences {
            for (i, tok) in seq.tokens.iter().enumerate() {
                let a = &tok.annotations;
                let _ = write!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    tok.surface,
                    tok.char_start,
                    tok.char_end,
                    col(&a.pos),
                    col(&a.lemma),
                    col(&a.chunk),
                    col(&a.pnp)
                );
                for extra in &a.extra {
                    let _ = write!(out, "\t{}", col(extra));
                }
                let label = seq.labels().map_or("_", |l| l[i].as_str());
                let _ = writeln!(out, "\t{label}");
            }
            out.push('\n');
        }
    }
    out
}

fn col(value: &Option<String>) -> &str {
    value.as_deref().unwrap_or("_")
}

fn uncol(value: &str) -> Option<String> {
    (value != "_").then(|| value.to_string())
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(text: &str, line: usize) -> Result<String> {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('r') => out.push('\r'),
            other => {
                return Err(Error::parse(
                    line,
                    format!("invalid escape `\\{}`", other.map(String::from).unwrap_or_default()),
                ))
            }
        }
    }
    Ok(out)
}

struct DocBuilder {
    id: String,
    dct: Anchor,
    raw_text: Option<String>,
    columns: Option<usize>,
    sequences: Vec<Sequence>,
    tokens: Vec<Token>,
    labels: Vec<Option<Label>>,
    sentence_line: usize,
}

impl DocBuilder {
    fn end_sentence(&mut self) -> Result<()> {
        if self.tokens.is_empty() {
            return Ok(());
        }
        let tokens = std::mem::take(&mut self.tokens);
        let labels = std::mem::take(&mut self.labels);
        let seq = if labels.iter().all(Option::is_none) {
            Sequence::new(tokens)
        } else if let Some(labels) = labels.iter().copied().collect::<Option<Vec<_>>>() {
            Sequence::labeled(tokens, labels).map_err(|e| match e {
                Error::InvalidBio { position, message } => {
                    Error::parse(self.sentence_line + position, message)
                }
                other => other,
            })?
        } else {
            return Err(Error::parse(
                self.sentence_line,
                "sentence mixes labelled and unlabelled tokens",
            ));
        };
        self.sequences.push(seq);
        Ok(())
    }

    fn finish(mut self, line: usize) -> Result<Document> {
        self.end_sentence()?;
        let doc = match self.raw_text {
            Some(raw_text) => Document {
                id: self.id,
                dct: self.dct,
                sequences: self.sequences,
                raw_text,
            },
            None => Document::from_sequences(self.id, self.dct, self.sequences)?,
        };
        doc.validate()
            .map_err(|e| Error::parse(line, e.to_string()))?;
        Ok(doc)
    }
}

pub fn parse_corpus(text: &str) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut current: Option<(DocBuilder, usize)> = None;
    let mut line_no = 0;
    for (idx, line) in text.lines().enumerate() {
        line_no = idx + 1;
        if let Some(rest) = line.strip_prefix("#doc ") {
            if let Some((builder, start)) = current.take() {
                docs.push(builder.finish(start)?);
            }
            let mut parts = rest.split_whitespace();
            let id = parts
                .next()
                .ok_or_else(|| Error::parse(line_no, "missing document id"))?;
            let dct = parts
                .next()
                .ok_or_else(|| Error::parse(line_no, "missing DCT in #doc header"))?;
            let dct: Anchor = dct
                .parse()
                .map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
            if parts.next().is_some() {
                return Err(Error::parse(line_no, "trailing fields in #doc header"));
            }
            current = Some((
                DocBuilder {
                    id: id.to_string(),
                    dct,
                    raw_text: None,
                    columns: None,
                    sequences: Vec::new(),
                    tokens: Vec::new(),
                    labels: Vec::new(),
                    sentence_line: line_no,
                },
                line_no,
            ));
            continue;
        }
        let Some((builder, _)) = current.as_mut() else {
            if line.trim().is_empty() {
                continue;
            }
            return Err(Error::parse(line_no, "content before any #doc header"));
        };
        if let Some(raw) = line.strip_prefix("#text\t") {
            if builder.raw_text.is_some() || !builder.sequences.is_empty() {
                return Err(Error::parse(line_no, "#text must directly follow #doc"));
            }
            builder.raw_text = Some(unescape(raw, line_no)?);
            continue;
        }
        if line.is_empty() {
            builder.end_sentence()?;
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let expected = *builder.columns.get_or_insert(fields.len());
        if fields.len() < BASE_COLUMNS || fields.len() != expected {
            return Err(Error::parse(
                line_no,
                format!(
                    "expected {} columns, found {}",
                    expected.max(BASE_COLUMNS),
                    fields.len()
                ),
            ));
        }
        let offset = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::parse(line_no, format!("invalid offset `{s}`")))
        };
        let (start, end) = (offset(fields[1])?, offset(fields[2])?);
        if fields[0].is_empty() || end != start + fields[0].chars().count() {
            return Err(Error::parse(
                line_no,
                format!("offsets {start}..{end} do not fit surface `{}`", fields[0]),
            ));
        }
        let last = fields.len() - 1;
        let label = match fields[last] {
            "_" => None,
            s => Some(
                s.parse::<Label>()
                    .map_err(|e| Error::parse(line_no, e.to_string()))?,
            ),
        };
        if builder.tokens.is_empty() {
            builder.sentence_line = line_no;
        }
        let annotations = Annotations {
            pos: uncol(fields[3]),
            lemma: uncol(fields[4]),
            chunk: uncol(fields[5]),
            pnp: uncol(fields[6]),
            extra: fields[7..last].iter().map(|s| uncol(s)).collect(),
        };
        builder.tokens.push(Token {
            surface: fields[0].to_string(),
            char_start: start,
            char_end: end,
            annotations,
        });
        builder.labels.push(label);
    }
    if let Some((builder, start)) = current {
        docs.push(builder.finish(start.max(line_no))?);
    }
    Ok(docs)
}

/// Key of a timex-attribute record: document id plus character extent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AttrKey {
    pub doc_id: String,
    pub span: CharSpan,
}

/// One line of the attribute sidecar:
/// `doc_id\tfirst_char\tlast_char\ttype\tvalue`, where `last_char` is
/// exclusive like token offsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttrRecord {
    pub key: AttrKey,
    pub timex_type: TimexType,
    pub value: String,
}

/// Timex attributes indexed by document and extent.
pub type GoldAttrs = BTreeMap<AttrKey, (TimexType, String)>;

pub fn parse_attrs(text: &str) -> Result<GoldAttrs> {
    let mut out = GoldAttrs::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(Error::parse(
                line_no,
                format!("expected 5 columns, found {}", fields.len()),
            ));
        }
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::parse(line_no, format!("invalid offset `{s}`")))
        };
        let span = CharSpan::new(num(fields[1])?, num(fields[2])?);
        if span.start >= span.end {
            return Err(Error::parse(line_no, "empty character extent"));
        }
        let timex_type: TimexType = fields[3]
            .parse()
            .map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
        let key = AttrKey {
            doc_id: fields[0].to_string(),
            span,
        };
        if out.insert(key, (timex_type, fields[4].to_string())).is_some() {
            return Err(Error::parse(line_no, "duplicate attribute record"));
        }
    }
    Ok(out)
}

pub fn format_attrs(attrs: &GoldAttrs) -> String {
    let mut out = String::new();
    for (key, (ty, value)) in attrs {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            key.doc_id, key.span.start, key.span.end, ty, value
        );
    }
    out
}

pub fn read_attrs(path: impl AsRef<Path>) -> Result<GoldAttrs> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_attrs(&text)
}

pub fn write_attrs(attrs: &GoldAttrs, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_attrs(attrs)).map_err(|e| Error::io(path, e))
}
