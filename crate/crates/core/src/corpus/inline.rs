use std::fmt::Write as _;

use super::{Document, TimexSpan};
use crate::error::{Error, Result};
use crate::normalizer::{Timex, TimexType};

/// Renders the document text with each timex wrapped in an inline `TIMEX3`
/// element. Ids `t1`, `t2`, ... follow textual order; all other characters are
/// copied through unchanged.
pub fn emit_inline_timex(doc: &Document, timexes: &[Timex]) -> Result<String> {
    let items: Vec<_> = timexes
        .iter()
        .map(|t| (&t.span, Some((t.timex_type, t.value.as_str()))))
        .collect();
    render(doc, items)
}

/// Like [`emit_inline_timex`] for spans without attributes: elements carry
/// only a `tid`.
pub fn emit_inline_spans(doc: &Document, spans: &[TimexSpan]) -> Result<String> {
    render(doc, spans.iter().map(|s| (s, None)).collect())
}

fn render(doc: &Document, items: Vec<(&TimexSpan, Option<(TimexType, &str)>)>) -> Result<String> {
    let mut placed: Vec<_> = items
        .into_iter()
        .map(|(span, attrs)| {
            let seq = doc
                .sequences
                .get(span.sequence_index)
                .ok_or_else(|| Error::InvalidInput(format!("timex refers to missing sentence {span}")))?;
            if span.last_token >= seq.len() || span.first_token > span.last_token {
                return Err(Error::InvalidInput(format!("timex out of bounds: {span}")));
            }
            Ok((span.char_span(seq), span, attrs))
        })
        .collect::<Result<_>>()?;
    placed.sort_by_key(|(extent, _, _)| *extent);
    for pair in placed.windows(2) {
        if pair[0].0.overlaps(&pair[1].0) {
            return Err(Error::Overlap {
                first: pair[0].1.to_string(),
                second: pair[1].1.to_string(),
            });
        }
    }

    let mut out = String::with_capacity(doc.raw_text.len() + placed.len() * 48);
    let mut next = placed.iter().enumerate().peekable();
    for (pos, c) in doc.raw_text.chars().enumerate() {
        if let Some(&(k, (extent, _, attrs))) = next.peek() {
            if extent.start == pos {
                let _ = write!(out, "<TIMEX3 tid=\"t{}\"", k + 1);
                if let Some((ty, value)) = attrs {
                    let _ = write!(out, " type=\"{ty}\" value=\"{value}\"");
                }
                out.push('>');
            }
            out.push(c);
            if extent.end == pos + 1 {
                out.push_str("</TIMEX3>");
                next.next();
            }
        } else {
            out.push(c);
        }
    }
    Ok(out)
}
