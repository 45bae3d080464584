//! Seeded generator of labelled sentences with date, duration and set
//! expressions, plus their TIMEX3 attributes.

use chrono::{Datelike, Duration, Months, NaiveDate};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::corpus::{AttrKey, CharSpan, Document, GoldAttrs, Label, Sequence, Token};
use crate::normalizer::{Anchor, TimexType};

const MONTHS: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September", "October",
    "November", "December",
];
const NUMBER_WORDS: [&str; 10] = ["zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine"];
const SUBJECTS: [&[&str]; 7] = [
    &["The", "committee"],
    &["Officials"],
    &["The", "company"],
    &["Investors"],
    &["The", "team"],
    &["Police"],
    &["The", "board"],
];
const VERBS: [&[&str]; 7] = [
    &["met"],
    &["announced", "the", "results"],
    &["reported", "losses"],
    &["signed", "the", "deal"],
    &["arrived"],
    &["opened", "an", "inquiry"],
    &["released", "figures"],
];
const PLACES: [&str; 5] = ["Paris", "Boston", "Rome", "Tokyo", "Lagos"];

/// Generated documents and the attributes of every gold expression.
#[derive(Clone, Debug)]
pub struct SynthCorpus {
    pub documents: Vec<Document>,
    pub attrs: GoldAttrs,
}

impl SynthCorpus {
    pub fn sentence_count(&self) -> usize {
        self.documents.iter().map(|d| d.sequences.len()).sum()
    }
}

struct Rng(SplitMix64);

impl Rng {
    fn below(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }

    fn pick<'a, T: ?Sized>(&mut self, items: &'a [&'a T]) -> &'a T {
        items[self.below(items.len())]
    }

    fn range(&mut self, lo: i64, hi: i64) -> i64 {
        lo + self.below((hi - lo + 1) as usize) as i64
    }
}

struct Expr {
    words: Vec<String>,
    lead: Option<&'static str>,
    timex_type: TimexType,
    value: String,
}

fn words(s: &str) -> Vec<String> {
    s.split(' ').map(String::from).collect()
}

fn amount(rng: &mut Rng, n: i64) -> String {
    if rng.below(2) == 0 {
        NUMBER_WORDS[n as usize].to_string()
    } else {
        n.to_string()
    }
}

/// Every number surface has a single role: bare years (1960-1989) never
/// appear inside month expressions (1990-2012), and day numbers (10-28) never
/// double as amounts (2-9).
fn expression(rng: &mut Rng, dct: NaiveDate) -> Expr {
    let (lead, timex_type, value, text) = match rng.below(8) {
        0 => {
            let y = rng.range(1990, 2012) as i32;
            let m = rng.range(1, 12) as u32;
            let d = rng.range(10, 28) as u32;
            let text = format!("{} {d} , {y}", MONTHS[m as usize - 1]);
            (Some("on"), TimexType::Date, format!("{y:04}-{m:02}-{d:02}"), text)
        }
        1 => {
            let y = rng.range(1990, 2012);
            let m = rng.range(1, 12);
            (Some("in"), TimexType::Date, format!("{y:04}-{m:02}"), format!("{} {y}", MONTHS[m as usize - 1]))
        }
        2 => {
            let y = rng.range(1960, 1989);
            (Some("in"), TimexType::Date, y.to_string(), y.to_string())
        }
        3 => {
            let n = rng.range(2, 9);
            let (unit, code) = [("day", "D"), ("week", "W"), ("month", "M"), ("year", "Y")][rng.below(4)];
            let text = format!("{} {unit}s", amount(rng, n));
            (Some("for"), TimexType::Duration, format!("P{n}{code}"), text)
        }
        4 => {
            let n = rng.range(2, 9);
            let date = dct - Duration::days(n);
            (None, TimexType::Date, date.format("%Y-%m-%d").to_string(), format!("{} days ago", amount(rng, n)))
        }
        5 => {
            let (word, shift) = [("yesterday", -1), ("today", 0), ("tomorrow", 1)][rng.below(3)];
            let date = dct + Duration::days(shift);
            (None, TimexType::Date, date.format("%Y-%m-%d").to_string(), word.to_string())
        }
        6 => match rng.below(3) {
            0 => (None, TimexType::Date, (dct.year() - 1).to_string(), "last year".to_string()),
            1 => {
                let d = dct.checked_add_months(Months::new(1)).expect("in range");
                (None, TimexType::Date, format!("{:04}-{:02}", d.year(), d.month()), "next month".to_string())
            }
            _ => {
                let w = (dct - Duration::days(7)).iso_week();
                (None, TimexType::Date, format!("{:04}-W{:02}", w.year(), w.week()), "last week".to_string())
            }
        },
        _ => {
            let (text, value) = [("daily", "P1D"), ("weekly", "P1W"), ("every month", "P1M")][rng.below(3)];
            (None, TimexType::Set, value.to_string(), text.to_string())
        }
    };
    Expr {
        words: words(&text),
        lead,
        timex_type,
        value,
    }
}

/// Sentence tokens with an expression index per token.
fn sentence(rng: &mut Rng, dct: NaiveDate) -> (Vec<String>, Vec<Option<usize>>, Vec<Expr>) {
    let mut toks: Vec<String> = Vec::new();
    let mut owner: Vec<Option<usize>> = Vec::new();
    let mut exprs = Vec::new();
    let push_plain = |toks: &mut Vec<String>, owner: &mut Vec<Option<usize>>, ws: &[&str]| {
        for w in ws {
            toks.push(w.to_string());
            owner.push(None);
        }
    };
    push_plain(&mut toks, &mut owner, rng.pick(&SUBJECTS));
    push_plain(&mut toks, &mut owner, rng.pick(&VERBS));
    let n_expr = [0, 1, 1, 1, 1, 2][rng.below(6)];
    for k in 0..n_expr {
        if k > 0 {
            push_plain(&mut toks, &mut owner, &["and", "again"]);
        }
        let e = expression(rng, dct);
        if let Some(lead) = e.lead {
            push_plain(&mut toks, &mut owner, &[lead]);
        }
        for w in &e.words {
            toks.push(w.clone());
            owner.push(Some(exprs.len()));
        }
        exprs.push(e);
    }
    if n_expr == 0 || rng.below(3) == 0 {
        let place = PLACES[rng.below(PLACES.len())];
        push_plain(&mut toks, &mut owner, &["in", place]);
    }
    push_plain(&mut toks, &mut owner, &["."]);
    (toks, owner, exprs)
}

/// `sentences` labelled sentences grouped ten to a document, each document
/// anchored to a random date in 2010–2014.
pub fn generate(sentences: usize, seed: u64) -> SynthCorpus {
    let mut rng = Rng(SplitMix64::seed_from_u64(seed));
    let mut documents = Vec::new();
    let mut attrs = GoldAttrs::new();
    let mut made = 0;
    while made < sentences {
        let id = format!("synth{:03}", documents.len());
        let dct = NaiveDate::from_ymd_opt(2010, 1, 1).expect("valid") + Duration::days(rng.range(0, 365 * 5));
        let mut seqs = Vec::new();
        let mut offset = 0;
        for _ in 0..10.min(sentences - made) {
            let (toks, owner, exprs) = sentence(&mut rng, dct);
            let mut tokens = Vec::with_capacity(toks.len());
            for w in &toks {
                let t = Token::new(w.as_str(), offset);
                offset = t.char_end + 1;
                tokens.push(t);
            }
            let labels: Vec<Label> = owner
                .iter()
                .enumerate()
                .map(|(i, o)| match o {
                    None => Label::O,
                    Some(e) if i > 0 && owner[i - 1] == Some(*e) => Label::I,
                    Some(_) => Label::B,
                })
                .collect();
            for (e, expr) in exprs.iter().enumerate() {
                let first = owner.iter().position(|o| *o == Some(e)).expect("expression placed");
                let last = owner.iter().rposition(|o| *o == Some(e)).expect("expression placed");
                attrs.insert(
                    AttrKey {
                        doc_id: id.clone(),
                        span: CharSpan::new(tokens[first].char_start, tokens[last].char_end),
                    },
                    (expr.timex_type, expr.value.clone()),
                );
            }
            seqs.push(Sequence::labeled(tokens, labels).expect("generator emits valid BIO"));
            made += 1;
        }
        let doc = Document::from_sequences(id, Anchor::new(dct), seqs).expect("generator offsets are increasing");
        documents.push(doc);
    }
    SynthCorpus { documents, attrs }
}
