use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::{Label, Sequence};
use crate::error::{Error, Result};

/// Minimum number of in-span occurrences for a token to get a prior.
pub const MIN_IN_SPAN: u64 = 2;

/// Label counts for one lower-cased token.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PriorCounts {
    /// Indexed by [`Label::index`].
    pub counts: [u64; 3],
    /// Occurrences labelled `B` or `I`.
    pub in_span: u64,
}

impl PriorCounts {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn distribution(&self) -> [f64; 3] {
        let n = self.total() as f64;
        self.counts.map(|c| c as f64 / n)
    }
}

/// Token label priors harvested from human-annotated sequences.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PriorTable {
    entries: BTreeMap<String, PriorCounts>,
}

impl PriorTable {
    /// Counts every occurrence of each token, keeping tokens seen inside a
    /// gold span at least [`MIN_IN_SPAN`] times.
    pub fn build<'a, I>(sequences: I) -> Result<PriorTable>
    where
        I: IntoIterator<Item = &'a Sequence>,
    {
        let mut all: BTreeMap<String, PriorCounts> = BTreeMap::new();
        for (i, seq) in sequences.into_iter().enumerate() {
            let labels = seq
                .labels()
                .ok_or_else(|| Error::InvalidInput(format!("sequence {i} has no gold labels")))?;
            for (tok, label) in seq.tokens.iter().zip(labels) {
                let e = all.entry(tok.surface.to_lowercase()).or_default();
                e.counts[label.index()] += 1;
                if *label != Label::O {
                    e.in_span += 1;
                }
            }
        }
        all.retain(|_, c| c.in_span >= MIN_IN_SPAN);
        Ok(PriorTable { entries: all })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn counts(&self, token: &str) -> Option<&PriorCounts> {
        self.entries.get(&token.to_lowercase())
    }

    /// Label distribution for a token, case-insensitively.
    pub fn prior(&self, token: &str) -> Option<[f64; 3]> {
        self.counts(token).map(PriorCounts::distribution)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &PriorCounts)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// `token<TAB>count_B<TAB>count_I<TAB>count_O<TAB>in_span_count`, sorted.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (tok, c) in &self.entries {
            let _ = writeln!(out, "{tok}\t{}\t{}\t{}\t{}", c.counts[0], c.counts[1], c.counts[2], c.in_span);
        }
        out
    }

    pub fn from_tsv(text: &str) -> Result<PriorTable> {
        let mut entries = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 5 {
                return Err(Error::parse(line_no, format!("expected 5 columns, found {}", cols.len())));
            }
            let mut nums = [0u64; 4];
            for (k, v) in cols[1..].iter().enumerate() {
                nums[k] = v
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("bad count {v:?}")))?;
            }
            let c = PriorCounts {
                counts: [nums[0], nums[1], nums[2]],
                in_span: nums[3],
            };
            if c.in_span != c.counts[0] + c.counts[1] || c.in_span < MIN_IN_SPAN {
                return Err(Error::parse(
                    line_no,
                    format!("in-span count {} inconsistent with B+I or below {MIN_IN_SPAN}", c.in_span),
                ));
            }
            let key = cols[0].to_lowercase();
            if entries.insert(key.clone(), c).is_some() {
                return Err(Error::parse(line_no, format!("duplicate token {key:?}")));
            }
        }
        Ok(PriorTable { entries })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<PriorTable> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PriorTable::from_tsv(&text)
    }
}
