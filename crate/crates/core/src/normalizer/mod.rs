//! Rule-based normalization of temporal expressions to TIMEX3 `type` and
//! `value`, anchored to the document creation time.
//!
//! Rules are tried in priority order and the first one whose pattern matches
//! the whole expression and whose value function succeeds wins. An expression
//! no rule covers yields `None`; no value is ever guessed.

mod calendar;
mod grammar;
mod numbers;
mod rules;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

pub use calendar::{add_period, resolve_weekday, Anchor, CalendarUnit, WeekdayDirection};
pub use grammar::validate_value;
pub use numbers::{parse_number, parse_ordinal};
pub use rules::{atom, builtin_rules, parse_rules, NormRule, ValueFn, BUILTIN_RULES};

use crate::corpus::{Document, TimexSpan};
use crate::error::{Error, Result};

/// TIMEX3 type attribute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TimexType {
    Date,
    Time,
    Duration,
    Set,
}

impl TimexType {
    pub fn as_str(self) -> &'static str {
        match self {
            TimexType::Date => "DATE",
            TimexType::Time => "TIME",
            TimexType::Duration => "DURATION",
            TimexType::Set => "SET",
        }
    }
}

impl fmt::Display for TimexType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TimexType {
    type Err = Error;

    fn from_str(s: &str) -> Result<TimexType> {
        match s {
            "DATE" => Ok(TimexType::Date),
            "TIME" => Ok(TimexType::Time),
            "DURATION" => Ok(TimexType::Duration),
            "SET" => Ok(TimexType::Set),
            other => Err(Error::InvalidInput(format!("unknown TIMEX3 type `{other}`"))),
        }
    }
}

/// An extracted, normalized temporal expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Timex {
    pub span: TimexSpan,
    pub timex_type: TimexType,
    pub value: String,
}

/// Result of a successful rule match.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalization {
    pub timex_type: TimexType,
    pub value: String,
    pub rule_id: String,
}

/// Default reading of a bare weekday name.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeekdayHint {
    #[default]
    Past,
    Future,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NormalizerOptions {
    /// Read `a/b/yyyy` as day/month instead of month/day.
    pub day_first: bool,
    pub weekday_hint: WeekdayHint,
}

/// An ordered, immutable rule set.
#[derive(Clone, Debug)]
pub struct Normalizer {
    rules: Vec<NormRule>,
    options: NormalizerOptions,
}

impl Default for Normalizer {
    fn default() -> Self {
        Normalizer::new(builtin_rules(), NormalizerOptions::default())
            .expect("built-in rules have unique ids")
    }
}

impl Normalizer {
    /// Builds a normalizer; rule ids must be unique. Rules are sorted by
    /// `(priority, id)`, so input order does not matter.
    pub fn new(mut rules: Vec<NormRule>, options: NormalizerOptions) -> Result<Normalizer> {
        rules.sort_by(|a, b| (a.priority, &a.id).cmp(&(b.priority, &b.id)));
        let mut ids: Vec<&str> = rules.iter().map(|r| r.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(pair) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Rule {
                id: pair[0].to_string(),
                message: "duplicate rule id".into(),
            });
        }
        Ok(Normalizer { rules, options })
    }

    pub fn with_options(mut self, options: NormalizerOptions) -> Normalizer {
        self.options = options;
        self
    }

    /// Built-in rules with overrides applied: an override replaces the
    /// built-in rule of the same id, new ids are added.
    pub fn with_overrides(overrides: Vec<NormRule>, options: NormalizerOptions) -> Result<Normalizer> {
        let mut rules = builtin_rules();
        for rule in overrides {
            match rules.iter_mut().find(|r| r.id == rule.id) {
                Some(slot) => *slot = rule,
                None => rules.push(rule),
            }
        }
        Normalizer::new(rules, options)
    }

    pub fn from_override_file(path: impl AsRef<Path>, options: NormalizerOptions) -> Result<Normalizer> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Normalizer::with_overrides(parse_rules(&text)?, options)
    }

    pub fn rules(&self) -> &[NormRule] {
        &self.rules
    }

    pub fn options(&self) -> &NormalizerOptions {
        &self.options
    }

    /// The rule set in file format.
    pub fn dump(&self) -> String {
        let mut out = String::from("# id\tpriority\tpattern\ttype\tvalue_fn[:args]\n");
        for rule in &self.rules {
            out.push_str(&rule.to_line());
            out.push('\n');
        }
        out
    }

    /// Normalizes an expression given as its token surfaces.
    pub fn normalize<S: AsRef<str>>(&self, tokens: &[S], anchor: &Anchor) -> Option<Normalization> {
        if tokens.is_empty() {
            return None;
        }
        let text = tokens
            .iter()
            .map(|t| t.as_ref().to_lowercase())
            .collect::<Vec<_>>()
            .join(" ");
        self.rules.iter().find_map(|rule| {
            let caps = rule.captures(&text)?;
            let value = rule.value_fn.apply(&caps, anchor, &self.options)?;
            validate_value(rule.timex_type, &value).then(|| Normalization {
                timex_type: rule.timex_type,
                value,
                rule_id: rule.id.clone(),
            })
        })
    }

    /// Normalizes every span of a document. Spans no rule covers are dropped,
    /// or typed `DATE`/`PRESENT_REF` when `fallback` is set.
    pub fn normalize_spans(&self, doc: &Document, spans: &[TimexSpan], fallback: bool) -> NormalizedSpans {
        let mut timexes = Vec::new();
        let mut unmatched = Vec::new();
        for span in spans {
            let seq = &doc.sequences[span.sequence_index];
            let surfaces: Vec<&str> = span.tokens(seq).iter().map(|t| t.surface.as_str()).collect();
            match self.normalize(&surfaces, &doc.dct) {
                Some(n) => timexes.push(Timex {
                    span: span.clone(),
                    timex_type: n.timex_type,
                    value: n.value,
                }),
                None => {
                    unmatched.push(span.clone());
                    if fallback {
                        timexes.push(Timex {
                            span: span.clone(),
                            timex_type: TimexType::Date,
                            value: "PRESENT_REF".into(),
                        });
                    }
                }
            }
        }
        NormalizedSpans { timexes, unmatched }
    }
}

/// Output of [`Normalizer::normalize_spans`].
#[derive(Clone, Debug, Default)]
pub struct NormalizedSpans {
    pub timexes: Vec<Timex>,
    /// Spans no rule matched (included in `timexes` only under fallback).
    pub unmatched: Vec<TimexSpan>,
}
