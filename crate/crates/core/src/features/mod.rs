//! Per-token feature rows and their expansion into observation strings.

mod gazetteer;
mod lexicon;
mod morph;
mod template;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use gazetteer::{match_gazetteer, Gazetteer};
pub use lexicon::{Lexicon, Lexicons};
pub use morph::{collapsed_pattern, morphological_row, pattern, regex_features, verb_tense, MORPH_FEATURES};
pub use template::{default_templates, format_templates, parse_templates, Template, BOS, EOS};

use crate::corpus::Sequence;
use crate::error::{Error, Result};

/// Which feature groups a model reads.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureProfile {
    /// Morphological features.
    #[default]
    Model1,
    /// Adds the chunk and prepositional-phrase columns.
    Model2,
    /// Adds gazetteer matches.
    Model3,
    /// Adds gazetteer matches and the extra pass-through columns.
    Model4,
}

impl FeatureProfile {
    pub const ALL: [FeatureProfile; 4] = [
        FeatureProfile::Model1,
        FeatureProfile::Model2,
        FeatureProfile::Model3,
        FeatureProfile::Model4,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureProfile::Model1 => "model1",
            FeatureProfile::Model2 => "model2",
            FeatureProfile::Model3 => "model3",
            FeatureProfile::Model4 => "model4",
        }
    }

    pub fn uses_syntax(self) -> bool {
        self == FeatureProfile::Model2
    }

    pub fn uses_gazetteers(self) -> bool {
        matches!(self, FeatureProfile::Model3 | FeatureProfile::Model4)
    }

    pub fn uses_extra_columns(self) -> bool {
        self == FeatureProfile::Model4
    }
}

impl fmt::Display for FeatureProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureProfile::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown profile {s:?} (expected model1..model4)")))
    }
}

/// Feature names fed to unigram and conjunction templates. `None` picks the
/// default: every row feature for unigrams; `word`, `pattern` and the
/// `re_*` flags for conjunctions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FeatureSelection {
    pub unigram: Option<Vec<String>>,
    pub conjunction: Option<Vec<String>>,
}

impl FeatureSelection {
    /// Same names for every template.
    pub fn uniform<S: AsRef<str>>(names: &[S]) -> FeatureSelection {
        let v: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        FeatureSelection {
            unigram: Some(v.clone()),
            conjunction: Some(v),
        }
    }

    fn resolve(&self, names: &[String]) -> Result<(Vec<usize>, Vec<usize>)> {
        let lookup = |wanted: &[String]| -> Result<Vec<usize>> {
            wanted
                .iter()
                .map(|w| {
                    names
                        .iter()
                        .position(|n| n == w)
                        .ok_or_else(|| Error::Config(format!("feature {w:?} is not produced by this profile")))
                })
                .collect()
        };
        let unigram = match &self.unigram {
            Some(v) => lookup(v)?,
            None => (0..names.len()).collect(),
        };
        let conjunction = match &self.conjunction {
            Some(v) => lookup(v)?,
            None => names
                .iter()
                .enumerate()
                .filter(|(_, n)| matches!(n.as_str(), "word" | "pattern") || n.starts_with("re_"))
                .map(|(i, _)| i)
                .collect(),
        };
        Ok((unigram, conjunction))
    }
}

/// Everything needed to rebuild the same observation strings later.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureConfig {
    pub profile: FeatureProfile,
    pub templates: Vec<Template>,
    pub selection: FeatureSelection,
    /// Gazetteer names, read when the profile uses gazetteers.
    pub gazetteers: Vec<String>,
    /// Number of extra pass-through columns, read by `model4`.
    pub extra_columns: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig::for_profile(FeatureProfile::Model1)
    }
}

impl FeatureConfig {
    pub fn for_profile(profile: FeatureProfile) -> FeatureConfig {
        FeatureConfig {
            profile,
            templates: default_templates(),
            selection: FeatureSelection::default(),
            gazetteers: Vec::new(),
            extra_columns: 0,
        }
    }

    /// Row feature names in column order.
    pub fn feature_names(&self) -> Vec<String> {
        let mut names: Vec<String> = MORPH_FEATURES.iter().map(|s| s.to_string()).collect();
        if self.profile.uses_syntax() {
            names.push("chunk".into());
            names.push("pnp".into());
        }
        if self.profile.uses_gazetteers() {
            names.extend(self.gazetteers.iter().map(|g| format!("gaz_{g}")));
        }
        if self.profile.uses_extra_columns() {
            names.extend((0..self.extra_columns).map(|i| format!("extra{i}")));
        }
        names
    }
}

/// Feature rows for one sequence; `rows[pos][col]` pairs with `names[col]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl FeatureMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, pos: usize, name: &str) -> Option<&str> {
        let col = self.names.iter().position(|n| n == name)?;
        self.rows.get(pos).map(|r| r[col].as_str())
    }

    /// One row as a name → value map.
    pub fn row_map(&self, pos: usize) -> BTreeMap<&str, &str> {
        self.names
            .iter()
            .map(String::as_str)
            .zip(self.rows[pos].iter().map(String::as_str))
            .collect()
    }

    /// Observation strings per position, `id:name[off]=value|...`.
    pub fn expand(&self, templates: &[Template], selection: &FeatureSelection) -> Result<Vec<Vec<String>>> {
        let (uni, conj) = selection.resolve(&self.names)?;
        Ok(template::expand_rows(&self.rows, templates, &self.names, &uni, &conj))
    }
}

/// Morphological rows only.
pub fn extract_morphological(seq: &Sequence, lexicons: &Lexicons) -> FeatureMatrix {
    FeatureMatrix {
        names: MORPH_FEATURES.iter().map(|s| s.to_string()).collect(),
        rows: seq.tokens.iter().map(|t| morphological_row(t, lexicons)).collect(),
    }
}

/// Free-function form of [`FeatureMatrix::expand`].
pub fn expand_templates(
    matrix: &FeatureMatrix,
    templates: &[Template],
    selection: &FeatureSelection,
) -> Result<Vec<Vec<String>>> {
    matrix.expand(templates, selection)
}

/// Builds rows and observation strings for a fixed [`FeatureConfig`].
#[derive(Clone, Debug)]
pub struct FeatureExtractor {
    config: FeatureConfig,
    lexicons: Arc<Lexicons>,
    gazetteers: Arc<Vec<Gazetteer>>,
    unigram: Vec<usize>,
    conjunction: Vec<usize>,
    names: Vec<String>,
}

impl FeatureExtractor {
    /// Fails when the profile needs a gazetteer that was not supplied or a
    /// selected feature is not produced.
    pub fn new(config: FeatureConfig, lexicons: Arc<Lexicons>, gazetteers: Arc<Vec<Gazetteer>>) -> Result<Self> {
        if config.profile.uses_gazetteers() {
            if config.gazetteers.is_empty() {
                return Err(Error::Config(format!("profile {} needs at least one gazetteer", config.profile)));
            }
            for name in &config.gazetteers {
                if !gazetteers.iter().any(|g| &g.name == name) {
                    return Err(Error::Config(format!("gazetteer {name:?} not loaded")));
                }
            }
        }
        let names = config.feature_names();
        let (unigram, conjunction) = config.selection.resolve(&names)?;
        Ok(FeatureExtractor {
            config,
            lexicons,
            gazetteers,
            unigram,
            conjunction,
            names,
        })
    }

    /// Model-1 extractor with built-in lexicons.
    pub fn builtin() -> FeatureExtractor {
        FeatureExtractor::new(FeatureConfig::default(), Arc::new(Lexicons::builtin()), Arc::new(Vec::new()))
            .expect("default config is valid")
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn extract(&self, seq: &Sequence) -> FeatureMatrix {
        let mut matrix = extract_morphological(seq, &self.lexicons);
        matrix.names = self.names.clone();
        let blank = |v: &Option<String>| v.clone().unwrap_or_else(|| "_".to_string());
        if self.config.profile.uses_syntax() {
            for (row, t) in matrix.rows.iter_mut().zip(&seq.tokens) {
                row.push(blank(&t.annotations.chunk));
                row.push(blank(&t.annotations.pnp));
            }
        }
        if self.config.profile.uses_gazetteers() {
            for name in &self.config.gazetteers {
                let gaz = self.gazetteers.iter().find(|g| &g.name == name).expect("checked in new");
                for (row, label) in matrix.rows.iter_mut().zip(gaz.match_sequence(seq)) {
                    row.push(label.to_string());
                }
            }
        }
        if self.config.profile.uses_extra_columns() {
            for (row, t) in matrix.rows.iter_mut().zip(&seq.tokens) {
                for i in 0..self.config.extra_columns {
                    row.push(t.annotations.extra.get(i).map(blank).unwrap_or_else(|| "_".into()));
                }
            }
        }
        matrix
    }

    pub fn observations(&self, seq: &Sequence) -> Vec<Vec<String>> {
        let m = self.extract(seq);
        template::expand_rows(&m.rows, &self.config.templates, &m.names, &self.unigram, &self.conjunction)
    }
}
