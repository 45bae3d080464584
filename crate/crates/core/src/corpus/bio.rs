use super::{Label, Sequence, TimexSpan};
use crate::error::{Error, Result};

/// How `bio_to_spans` treats an `I` that does not continue a span.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BioMode {
    /// Reject it.
    Strict,
    /// Read it as `B`. Meant for raw decoder output only.
    Tolerant,
}

pub fn validate_bio(labels: &[Label]) -> Result<()> {
    let mut prev = Label::O;
    for (i, &label) in labels.iter().enumerate() {
        if label == Label::I && prev == Label::O {
            let message = if i == 0 {
                "sequence starts with I".to_string()
            } else {
                "I follows O".to_string()
            };
            return Err(Error::InvalidBio {
                position: i,
                message,
            });
        }
        prev = label;
    }
    Ok(())
}

pub fn is_valid_bio(labels: &[Label]) -> bool {
    validate_bio(labels).is_ok()
}

/// Labels a sentence from non-overlapping spans: `B` on each span's first
/// token, `I` on the rest, `O` elsewhere.
pub fn spans_to_bio(spans: &[TimexSpan], seq: &Sequence) -> Result<Vec<Label>> {
    let mut labels = vec![Label::O; seq.len()];
    let mut owner: Vec<Option<usize>> = vec![None; seq.len()];
    for (k, span) in spans.iter().enumerate() {
        if span.first_token > span.last_token || span.last_token >= seq.len() {
            return Err(Error::InvalidInput(format!(
                "span {span} out of bounds for {} tokens",
                seq.len()
            )));
        }
        for pos in span.first_token..=span.last_token {
            if let Some(other) = owner[pos] {
                return Err(Error::Overlap {
                    first: spans[other].to_string(),
                    second: span.to_string(),
                });
            }
            owner[pos] = Some(k);
            labels[pos] = if pos == span.first_token {
                Label::B
            } else {
                Label::I
            };
        }
    }
    Ok(labels)
}

/// Extracts maximal `B I*` runs as spans.
pub fn bio_to_spans(
    labels: &[Label],
    seq: &Sequence,
    sequence_index: usize,
    mode: BioMode,
) -> Result<Vec<TimexSpan>> {
    if labels.len() != seq.len() {
        return Err(Error::InvalidInput(format!(
            "{} labels for {} tokens",
            labels.len(),
            seq.len()
        )));
    }
    if mode == BioMode::Strict {
        validate_bio(labels)?;
    }
    let mut spans = Vec::new();
    let mut open: Option<usize> = None;
    for (i, &label) in labels.iter().enumerate() {
        match label {
            Label::B => {
                if let Some(start) = open.replace(i) {
                    spans.push(TimexSpan::new(seq, sequence_index, start, i - 1));
                }
            }
            Label::I => {
                if open.is_none() {
                    open = Some(i);
                }
            }
            Label::O => {
                if let Some(start) = open.take() {
                    spans.push(TimexSpan::new(seq, sequence_index, start, i - 1));
                }
            }
        }
    }
    if let Some(start) = open {
        spans.push(TimexSpan::new(seq, sequence_index, start, labels.len() - 1));
    }
    Ok(spans)
}
