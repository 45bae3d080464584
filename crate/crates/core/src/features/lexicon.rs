use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};

/// A case-insensitive word list.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: HashSet<String>,
}

impl Lexicon {
    /// One entry per line; `#` starts a comment line.
    pub fn parse(text: &str) -> Lexicon {
        let entries = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        Lexicon { entries }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains(&word.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

macro_rules! lexicons {
    ($($field:ident),* $(,)?) => {
        /// Word lists behind the lexical features.
        #[derive(Clone, Debug, PartialEq, Eq)]
        pub struct Lexicons {
            $(pub $field: Lexicon,)*
        }

        impl Lexicons {
            /// The lists shipped with the crate.
            pub fn builtin() -> Lexicons {
                Lexicons {
                    $($field: Lexicon::parse(include_str!(concat!(
                        "../../lexicons/", stringify!($field), ".txt"
                    ))),)*
                }
            }

            /// Built-in lists, each replaced by `<dir>/<name>.txt` when present.
            pub fn load_dir(dir: impl AsRef<Path>) -> Result<Lexicons> {
                let dir = dir.as_ref();
                if !dir.is_dir() {
                    return Err(Error::Config(format!(
                        "lexicon directory {} does not exist",
                        dir.display()
                    )));
                }
                let mut lex = Lexicons::builtin();
                $(
                    let path = dir.join(concat!(stringify!($field), ".txt"));
                    if path.is_file() {
                        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                        lex.$field = Lexicon::parse(&text);
                    }
                )*
                Ok(lex)
            }

            pub const NAMES: &'static [&'static str] = &[$(stringify!($field)),*];
        }
    };
}

lexicons!(
    weekdays,
    months,
    seasons,
    periods,
    past_refs,
    present_refs,
    future_refs,
    signals,
    fuzzy,
    modifiers,
    temporal_adverbs,
    adjectives,
    conjunctions,
    prepositions,
    cardinals,
    ordinals,
    time_units,
    stopwords,
);

impl Default for Lexicons {
    fn default() -> Self {
        Lexicons::builtin()
    }
}
