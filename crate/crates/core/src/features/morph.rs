use std::sync::OnceLock;

use regex::Regex;
use rust_stemmers::{Algorithm, Stemmer};

use super::lexicon::Lexicons;
use crate::corpus::Token;

/// Character-class shape: `X` upper, `x` lower, `d` digit, anything else kept.
pub fn pattern(surface: &str) -> String {
    surface
        .chars()
        .map(|c| {
            if c.is_uppercase() {
                'X'
            } else if c.is_lowercase() {
                'x'
            } else if c.is_numeric() {
                'd'
            } else {
                c
            }
        })
        .collect()
}

/// [`pattern`] with runs of one character collapsed.
pub fn collapsed_pattern(surface: &str) -> String {
    let mut out = String::new();
    for c in pattern(surface).chars() {
        if !out.ends_with(c) {
            out.push(c);
        }
    }
    out
}

/// Morphological feature names, in row order.
pub const MORPH_FEATURES: &[&str] = &[
    "word",
    "lemma",
    "stem",
    "pattern",
    "cpattern",
    "prefix3",
    "suffix3",
    "upper_first",
    "ends_s",
    "no_letters",
    "no_alnum",
    "verb_tense",
    "is_lower",
    "is_alpha",
    "is_digit",
    "is_alnum",
    "is_title",
    "is_capitalized",
    "is_acronym",
    "is_number",
    "is_decimal",
    "is_dotted_number",
    "is_stopword",
    "re_cardinal",
    "re_ordinal",
    "re_time",
    "re_date",
    "re_period",
    "re_weekday",
    "re_season",
    "re_past",
    "re_present",
    "re_future",
    "re_signal",
    "re_fuzzy",
    "re_modifier",
    "re_tadverb",
    "re_adjective",
    "re_conjunction",
    "re_preposition",
];

/// The `re_*` names, the default conjunction set alongside `word` and `pattern`.
pub fn regex_features() -> impl Iterator<Item = &'static str> {
    MORPH_FEATURES.iter().copied().filter(|n| n.starts_with("re_"))
}

struct Patterns {
    acronym: Regex,
    number: Regex,
    decimal: Regex,
    dotted: Regex,
    cardinal: Regex,
    ordinal: Regex,
    time: Regex,
    date: Regex,
    month_year: Regex,
    adjective: Regex,
}

fn patterns() -> &'static Patterns {
    static P: OnceLock<Patterns> = OnceLock::new();
    P.get_or_init(|| {
        let re = |s: &str| Regex::new(s).expect("static regex");
        Patterns {
            acronym: re(r"^(?:\p{Lu}\.)+$"),
            number: re(r"^[+-]?\d+(?:[.,]\d+)*$"),
            decimal: re(r"^\d+\.\d+$"),
            dotted: re(r"^\d+(?:\.\d+){2,}$"),
            cardinal: re(r"^(?:\d+|\d{1,3}(?:,\d{3})+)$"),
            ordinal: re(r"(?i)^\d+(?:st|nd|rd|th)$"),
            time: re(r"(?i)^(?:\d{1,2}:\d{2}(?::\d{2})?|\d{1,2}(?:am|pm)|a\.m\.|p\.m\.|am|pm)$"),
            date: re(r"^(?:\d{4}-\d{1,2}-\d{1,2}|\d{1,2}[/-]\d{1,2}[/-]\d{2,4}|(?:1\d|20)\d{2}|\d{2,4}s|'\d{2}s?)$"),
            month_year: re(r"^(\p{L}{3,9})[-/](?:\d{2}|\d{4})$"),
            adjective: re(r"(?i)^\p{L}{3,}(?:al|ous|ful|ive|able|ible|ic|less|ish)$"),
        }
    })
}

fn stemmer() -> &'static Stemmer {
    static S: OnceLock<Stemmer> = OnceLock::new();
    S.get_or_init(|| Stemmer::create(Algorithm::English))
}

fn flag(b: bool) -> String {
    if b { "y" } else { "n" }.to_string()
}

fn or_blank(s: String) -> String {
    if s.is_empty() {
        "_".to_string()
    } else {
        s
    }
}

/// Coarse tense from a Penn or TreeTagger verb tag.
pub fn verb_tense(pos: Option<&str>) -> &'static str {
    let Some(tag) = pos else { return "_" };
    if tag == "MD" {
        return "modal";
    }
    let verb = ["VB", "VV", "VH"].iter().find(|p| tag.starts_with(*p));
    match verb.map(|p| &tag[p.len()..]) {
        Some("") => "base",
        Some("D") => "past",
        Some("N") => "participle",
        Some("G") => "gerund",
        Some("Z" | "P") => "present",
        _ => "_",
    }
}

fn is_cardinal(word: &str, lex: &Lexicons) -> bool {
    patterns().cardinal.is_match(word)
        || lex.cardinals.contains(word)
        || (word.contains('-') && word.split('-').all(|p| lex.cardinals.contains(p)))
}

fn is_ordinal(word: &str, lex: &Lexicons) -> bool {
    patterns().ordinal.is_match(word)
        || lex.ordinals.contains(word)
        || word
            .rsplit_once('-')
            .is_some_and(|(a, b)| lex.cardinals.contains(a) && lex.ordinals.contains(b))
}

fn is_date(word: &str, lex: &Lexicons) -> bool {
    let p = patterns();
    p.date.is_match(word)
        || lex.months.contains(word)
        || p.month_year
            .captures(word)
            .is_some_and(|c| lex.months.contains(&c[1]))
}

/// Values of [`MORPH_FEATURES`] for one token.
pub fn morphological_row(token: &Token, lex: &Lexicons) -> Vec<String> {
    let w = token.surface.as_str();
    let lower = w.to_lowercase();
    let chars: Vec<char> = w.chars().collect();
    let p = patterns();
    let ann = &token.annotations;
    let has_cased = chars.iter().any(|c| c.is_uppercase() || c.is_lowercase());
    let lemma = ann.lemma.clone().unwrap_or_else(|| lower.clone());

    let row = vec![
        w.to_string(),
        lemma,
        stemmer().stem(&lower).into_owned(),
        pattern(w),
        collapsed_pattern(w),
        chars.iter().take(3).collect(),
        chars[chars.len().saturating_sub(3)..].iter().collect(),
        flag(chars.first().is_some_and(|c| c.is_uppercase())),
        flag(lower.ends_with('s')),
        or_blank(chars.iter().filter(|c| !c.is_alphabetic()).collect()),
        or_blank(chars.iter().filter(|c| !c.is_alphanumeric()).collect()),
        verb_tense(ann.pos.as_deref()).to_string(),
        flag(has_cased && !chars.iter().any(|c| c.is_uppercase())),
        flag(!chars.is_empty() && chars.iter().all(|c| c.is_alphabetic())),
        flag(!chars.is_empty() && chars.iter().all(|c| c.is_ascii_digit())),
        flag(!chars.is_empty() && chars.iter().all(|c| c.is_alphanumeric())),
        flag(
            chars.first().is_some_and(|c| c.is_uppercase())
                && chars[1..].iter().all(|c| !c.is_uppercase()),
        ),
        flag(has_cased && !chars.iter().any(|c| c.is_lowercase())),
        flag(p.acronym.is_match(w)),
        flag(p.number.is_match(w)),
        flag(p.decimal.is_match(w)),
        flag(p.dotted.is_match(w)),
        flag(lex.stopwords.contains(w)),
        flag(is_cardinal(&lower, lex)),
        flag(is_ordinal(&lower, lex)),
        flag(p.time.is_match(w)),
        flag(is_date(w, lex)),
        flag(lex.periods.contains(w)),
        flag(lex.weekdays.contains(w)),
        flag(lex.seasons.contains(w)),
        flag(lex.past_refs.contains(w)),
        flag(lex.present_refs.contains(w)),
        flag(lex.future_refs.contains(w)),
        flag(lex.signals.contains(w)),
        flag(lex.fuzzy.contains(w)),
        flag(lex.modifiers.contains(w)),
        flag(lex.temporal_adverbs.contains(w)),
        flag(lex.adjectives.contains(w) || p.adjective.is_match(w)),
        flag(lex.conjunctions.contains(w)),
        flag(lex.prepositions.contains(w)),
    ];
    debug_assert_eq!(row.len(), MORPH_FEATURES.len());
    row
}
