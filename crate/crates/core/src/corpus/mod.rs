//! Tokens, sentences and documents, plus conversion between annotated
//! spans and BIO label sequences.

mod bio;
mod inline;
mod io;
mod tokenize;

use std::fmt;
use std::str::FromStr;

pub use bio::{bio_to_spans, is_valid_bio, spans_to_bio, validate_bio, BioMode};
pub use inline::{emit_inline_spans, emit_inline_timex};
pub use io::{
    format_attrs, format_corpus, parse_attrs, parse_corpus, read_attrs, read_corpus, write_attrs,
    write_corpus, AttrKey, AttrRecord, GoldAttrs,
};
pub use tokenize::{split_sentences, tokenize};

use crate::error::{Error, Result};
use crate::normalizer::Anchor;

/// A BIO label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    B,
    I,
    O,
}

impl Label {
    /// All labels in their canonical order, which is also the tie-break order.
    pub const ALL: [Label; 3] = [Label::B, Label::I, Label::O];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Label {
        Label::ALL[index]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::B => "B",
            Label::I => "I",
            Label::O => "O",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "B" => Ok(Label::B),
            "I" => Ok(Label::I),
            "O" => Ok(Label::O),
            other => Err(Error::InvalidInput(format!("unknown label `{other}`"))),
        }
    }
}

/// Externally supplied per-token annotation columns.
///
/// `extra` holds any additional pass-through columns (e.g. lexical-database
/// senses) in file order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Annotations {
    pub pos: Option<String>,
    pub lemma: Option<String>,
    pub chunk: Option<String>,
    pub pnp: Option<String>,
    pub extra: Vec<Option<String>>,
}

/// One token with its character offsets into the source document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    /// First character (inclusive), counted in Unicode scalar values.
    pub char_start: usize,
    /// Last character (exclusive).
    pub char_end: usize,
    pub annotations: Annotations,
}

impl Token {
    /// Builds a token starting at `char_start`; the end offset follows from the
    /// surface length.
    pub fn new(surface: impl Into<String>, char_start: usize) -> Token {
        let surface = surface.into();
        let char_end = char_start + surface.chars().count();
        Token {
            surface,
            char_start,
            char_end,
            annotations: Annotations::default(),
        }
    }

    pub fn with_annotations(mut self, annotations: Annotations) -> Token {
        self.annotations = annotations;
        self
    }

    /// True when the token consists only of punctuation or symbol characters.
    pub fn is_punctuation(&self) -> bool {
        is_punctuation(&self.surface)
    }
}

pub(crate) fn is_punctuation(surface: &str) -> bool {
    !surface.is_empty() && surface.chars().all(|c| !c.is_alphanumeric())
}

/// A sentence: tokens plus optional gold labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sequence {
    pub tokens: Vec<Token>,
    gold_labels: Option<Vec<Label>>,
}

impl Sequence {
    pub fn new(tokens: Vec<Token>) -> Sequence {
        Sequence {
            tokens,
            gold_labels: None,
        }
    }

    /// Builds a labelled sequence; labels must align with tokens and form
    /// valid BIO.
    pub fn labeled(tokens: Vec<Token>, labels: Vec<Label>) -> Result<Sequence> {
        let mut seq = Sequence::new(tokens);
        seq.set_labels(labels)?;
        Ok(seq)
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.gold_labels.as_deref()
    }

    pub fn set_labels(&mut self, labels: Vec<Label>) -> Result<()> {
        if labels.len() != self.tokens.len() {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} tokens",
                labels.len(),
                self.tokens.len()
            )));
        }
        validate_bio(&labels)?;
        self.gold_labels = Some(labels);
        Ok(())
    }

    pub fn clear_labels(&mut self) {
        self.gold_labels = None;
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn surfaces(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    /// Gold spans of this sentence, empty when unlabelled.
    pub fn gold_spans(&self, sequence_index: usize) -> Vec<TimexSpan> {
        match &self.gold_labels {
            Some(labels) => bio_to_spans(labels, self, sequence_index, BioMode::Strict)
                .expect("gold labels are validated on construction"),
            None => Vec::new(),
        }
    }
}

/// Half-open character range `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CharSpan {
    pub start: usize,
    pub end: usize,
}

impl CharSpan {
    pub fn new(start: usize, end: usize) -> CharSpan {
        CharSpan { start, end }
    }

    pub fn overlaps(&self, other: &CharSpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}

impl fmt::Display for CharSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// A run of tokens inside one sentence marking a temporal expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimexSpan {
    pub sequence_index: usize,
    pub first_token: usize,
    /// Inclusive.
    pub last_token: usize,
    pub text: String,
}

impl TimexSpan {
    /// Builds a span over `seq`, reconstructing its text from token offsets.
    pub fn new(seq: &Sequence, sequence_index: usize, first: usize, last: usize) -> TimexSpan {
        TimexSpan {
            sequence_index,
            first_token: first,
            last_token: last,
            text: join_tokens(&seq.tokens[first..=last]),
        }
    }

    pub fn char_span(&self, seq: &Sequence) -> CharSpan {
        CharSpan::new(
            seq.tokens[self.first_token].char_start,
            seq.tokens[self.last_token].char_end,
        )
    }

    pub fn tokens<'a>(&self, seq: &'a Sequence) -> &'a [Token] {
        &seq.tokens[self.first_token..=self.last_token]
    }
}

impl fmt::Display for TimexSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "sentence {} tokens {}..={} `{}`",
            self.sequence_index, self.first_token, self.last_token, self.text
        )
    }
}

/// Joins tokens, reproducing inter-token gaps as spaces.
pub(crate) fn join_tokens(tokens: &[Token]) -> String {
    let mut out = String::new();
    let mut prev_end: Option<usize> = None;
    for tok in tokens {
        if let Some(end) = prev_end {
            out.extend(std::iter::repeat_n(' ', tok.char_start.saturating_sub(end)));
        }
        out.push_str(&tok.surface);
        prev_end = Some(tok.char_end);
    }
    out
}

/// A document: sentences anchored to a creation time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub dct: Anchor,
    pub sequences: Vec<Sequence>,
    pub raw_text: String,
}

impl Document {
    /// Tokenizes and sentence-splits raw text.
    pub fn from_text(id: impl Into<String>, dct: Anchor, text: &str) -> Document {
        let sequences = split_sentences(text, tokenize(text))
            .into_iter()
            .map(Sequence::new)
            .collect();
        Document {
            id: id.into(),
            dct,
            sequences,
            raw_text: text.to_string(),
        }
    }

    /// Builds a document whose raw text is reconstructed from token offsets.
    /// Gaps are filled with spaces, with a newline opening each sentence gap.
    pub fn from_sequences(
        id: impl Into<String>,
        dct: Anchor,
        sequences: Vec<Sequence>,
    ) -> Result<Document> {
        let raw_text = reconstruct_text(&sequences)?;
        Ok(Document {
            id: id.into(),
            dct,
            sequences,
            raw_text,
        })
    }

    /// Checks offset monotonicity and that surfaces match the raw text.
    pub fn validate(&self) -> Result<()> {
        let chars: Vec<char> = self.raw_text.chars().collect();
        let mut prev_end = 0usize;
        for (si, seq) in self.sequences.iter().enumerate() {
            for (ti, tok) in seq.tokens.iter().enumerate() {
                if tok.char_start >= tok.char_end || tok.char_start < prev_end {
                    return Err(Error::InvalidInput(format!(
                        "document {}: sentence {si} token {ti} has non-increasing offsets",
                        self.id
                    )));
                }
                let text: Option<String> = chars
                    .get(tok.char_start..tok.char_end)
                    .map(|cs| cs.iter().collect());
                if text.as_deref() != Some(tok.surface.as_str()) {
                    return Err(Error::InvalidInput(format!(
                        "document {}: token `{}` does not match text at {}..{}",
                        self.id, tok.surface, tok.char_start, tok.char_end
                    )));
                }
                prev_end = tok.char_end;
            }
        }
        Ok(())
    }

    /// Gold spans across all sentences.
    pub fn gold_spans(&self) -> Vec<TimexSpan> {
        self.sequences
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.gold_spans(i))
            .collect()
    }

    pub fn char_span(&self, span: &TimexSpan) -> CharSpan {
        span.char_span(&self.sequences[span.sequence_index])
    }

    pub fn token_count(&self) -> usize {
        self.sequences.iter().map(Sequence::len).sum()
    }
}

fn reconstruct_text(sequences: &[Sequence]) -> Result<String> {
    let mut out = String::new();
    let mut cursor = 0usize;
    for seq in sequences {
        let mut sentence_start = true;
        for tok in &seq.tokens {
            if tok.char_start < cursor {
                return Err(Error::InvalidInput(format!(
                    "token `{}` at {} overlaps preceding text",
                    tok.surface, tok.char_start
                )));
            }
            let gap = tok.char_start - cursor;
            for k in 0..gap {
                out.push(if sentence_start && cursor > 0 && k == 0 {
                    '\n'
                } else {
                    ' '
                });
            }
            out.push_str(&tok.surface);
            cursor = tok.char_end;
            sentence_start = false;
        }
    }
    Ok(out)
}
