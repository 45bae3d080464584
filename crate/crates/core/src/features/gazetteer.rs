use std::collections::HashSet;
use std::path::Path;

use crate::corpus::{tokenize, Label, Sequence};
use crate::error::{Error, Result};

/// A named phrase list matched case-insensitively over token sequences.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gazetteer {
    pub name: String,
    phrases: HashSet<Vec<String>>,
    max_len: usize,
}

impl Gazetteer {
    /// Phrases are tokenized like running text, so `St. Louis` matches the
    /// tokens `St`, `.`, `Louis`.
    pub fn new<I, S>(name: impl Into<String>, phrases: I) -> Gazetteer
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let phrases: HashSet<Vec<String>> = phrases
            .into_iter()
            .map(|p| {
                tokenize(p.as_ref())
                    .into_iter()
                    .map(|t| t.surface.to_lowercase())
                    .collect::<Vec<_>>()
            })
            .filter(|p| !p.is_empty())
            .collect();
        let max_len = phrases.iter().map(Vec::len).max().unwrap_or(0);
        Gazetteer {
            name: name.into(),
            phrases,
            max_len,
        }
    }

    /// One phrase per line, `#` comments.
    pub fn parse(name: impl Into<String>, text: &str) -> Gazetteer {
        Gazetteer::new(
            name,
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Gazetteer> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::Config(format!("bad gazetteer file name {}", path.display())))?;
        Ok(Gazetteer::parse(name, &text))
    }

    /// Every `*.txt` file of a directory, sorted by name.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Vec<Gazetteer>> {
        let dir = dir.as_ref();
        let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        let mut paths = Vec::new();
        for entry in entries {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            if path.extension().is_some_and(|e| e == "txt") {
                paths.push(path);
            }
        }
        paths.sort();
        paths.iter().map(Gazetteer::load).collect()
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    /// Leftmost-longest matching: `B` on a match's first token, `I` on the
    /// rest, `O` elsewhere.
    pub fn match_sequence(&self, seq: &Sequence) -> Vec<Label> {
        let words: Vec<String> = seq.tokens.iter().map(|t| t.surface.to_lowercase()).collect();
        let mut labels = vec![Label::O; words.len()];
        let mut i = 0;
        while i < words.len() {
            let longest = (1..=self.max_len.min(words.len() - i))
                .rev()
                .find(|&len| self.phrases.contains(&words[i..i + len]));
            match longest {
                Some(len) => {
                    labels[i] = Label::B;
                    labels[i + 1..i + len].fill(Label::I);
                    i += len;
                }
                None => i += 1,
            }
        }
        labels
    }
}

/// Free-function form of [`Gazetteer::match_sequence`].
pub fn match_gazetteer(seq: &Sequence, gaz: &Gazetteer) -> Vec<Label> {
    gaz.match_sequence(seq)
}
