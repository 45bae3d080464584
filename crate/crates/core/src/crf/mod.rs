//! Linear-chain CRF over the labels `B`, `I`, `O`.
//!
//! Weight slot `f * 3 + y` pairs observation feature `f` with label `y`; the
//! nine slots after them hold label-to-label transitions.

mod lattice;
mod train;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

pub use lattice::{forward_backward, path_score, viterbi, MarginalTable};
pub use train::{log_likelihood_and_gradient, IterationRecord, TrainingLog};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::{format_templates, parse_templates, FeatureConfig, FeatureSelection};

pub const N_LABELS: usize = 3;
pub const FORMAT_VERSION: &str = "1";
const MAGIC: &str = "chronotag-crf";
const TRANSITION: &str = "__T__";

/// Training hyperparameters.
#[derive(Clone, Debug, PartialEq)]
pub struct CrfParams {
    /// Penalty is `‖w‖² / (2C)`; larger values regularize less.
    pub c: f64,
    /// Relative objective change below which training stops.
    pub eta: f64,
    pub max_iter: usize,
    /// Minimum occurrence count for a feature string to enter the index.
    pub cutoff: usize,
}

impl Default for CrfParams {
    fn default() -> Self {
        CrfParams {
            c: 1.0,
            eta: 1e-4,
            max_iter: 300,
            cutoff: 1,
        }
    }
}

impl CrfParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::Config(format!("C must be positive, got {}", self.c)));
        }
        if !(self.eta > 0.0) {
            return Err(Error::Config(format!("eta must be positive, got {}", self.eta)));
        }
        if self.cutoff == 0 {
            return Err(Error::Config("cutoff must be at least 1".into()));
        }
        Ok(())
    }
}

/// Sorted observation feature strings and their ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FeatureIndex {
    features: Vec<String>,
    ids: HashMap<String, u32>,
}

impl FeatureIndex {
    /// Keeps strings seen at least `cutoff` times across all positions.
    pub fn build<'a, I>(sequences: I, cutoff: usize) -> Result<FeatureIndex>
    where
        I: IntoIterator<Item = &'a Vec<Vec<String>>>,
    {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        let mut positions = 0usize;
        for seq in sequences {
            for pos in seq {
                positions += 1;
                for f in pos {
                    *counts.entry(f.as_str()).or_default() += 1;
                }
            }
        }
        if positions == 0 {
            return Err(Error::Training("cannot build a feature index from an empty corpus".into()));
        }
        let features: Vec<String> = counts
            .into_iter()
            .filter(|&(_, n)| n >= cutoff)
            .map(|(f, _)| f.to_string())
            .collect();
        Ok(FeatureIndex::from_sorted(features))
    }

    fn from_sorted(features: Vec<String>) -> FeatureIndex {
        let ids = features.iter().enumerate().map(|(i, f)| (f.clone(), i as u32)).collect();
        FeatureIndex { features, ids }
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Observation slots plus the nine transitions.
    pub fn n_weights(&self) -> usize {
        self.features.len() * N_LABELS + N_LABELS * N_LABELS
    }

    pub fn id(&self, feature: &str) -> Option<u32> {
        self.ids.get(feature).copied()
    }

    pub fn feature(&self, id: u32) -> &str {
        &self.features[id as usize]
    }

    pub fn slot(&self, feature: &str, label: Label) -> Option<usize> {
        self.id(feature).map(|f| f as usize * N_LABELS + label.index())
    }

    pub fn transition_slot(&self, from: Label, to: Label) -> usize {
        self.features.len() * N_LABELS + from.index() * N_LABELS + to.index()
    }

    /// Maps strings to ids, dropping unknown ones.
    pub fn encode(&self, observations: &[Vec<String>]) -> Vec<Vec<u32>> {
        observations
            .iter()
            .map(|pos| pos.iter().filter_map(|f| self.id(f)).collect())
            .collect()
    }
}

/// Feature ids per position, with optional gold labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedSequence {
    pub features: Vec<Vec<u32>>,
    pub labels: Option<Vec<Label>>,
}

pub(crate) fn unary_scores(weights: &[f64], features: &[Vec<u32>]) -> Vec<[f64; 3]> {
    features
        .iter()
        .map(|feats| {
            let mut s = [0.0; 3];
            for &f in feats {
                let base = f as usize * N_LABELS;
                for (y, v) in s.iter_mut().enumerate() {
                    *v += weights[base + y];
                }
            }
            s
        })
        .collect()
}

pub(crate) fn transitions(weights: &[f64], n_features: usize) -> [[f64; 3]; 3] {
    let base = n_features * N_LABELS;
    let mut t = [[0.0; 3]; 3];
    for (i, row) in t.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = weights[base + i * N_LABELS + j];
        }
    }
    t
}

/// A trained tagger: index, weights, and the feature setup that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct CrfModel {
    pub index: FeatureIndex,
    pub weights: Vec<f64>,
    pub features: FeatureConfig,
    pub params: CrfParams,
    pub log: TrainingLog,
}

impl CrfModel {
    /// Zero weights over an index.
    pub fn zeros(index: FeatureIndex, features: FeatureConfig, params: CrfParams) -> CrfModel {
        let weights = vec![0.0; index.n_weights()];
        CrfModel {
            index,
            weights,
            features,
            params,
            log: TrainingLog::default(),
        }
    }

    pub fn labels(&self) -> [Label; 3] {
        Label::ALL
    }

    pub fn transition_matrix(&self) -> [[f64; 3]; 3] {
        transitions(&self.weights, self.index.len())
    }

    /// Unary label scores for each position.
    pub fn unary(&self, observations: &[Vec<String>]) -> Vec<[f64; 3]> {
        unary_scores(&self.weights, &self.index.encode(observations))
    }

    pub fn forward_backward(&self, observations: &[Vec<String>]) -> MarginalTable {
        forward_backward(&self.unary(observations), &self.transition_matrix()).0
    }

    pub fn viterbi(&self, observations: &[Vec<String>]) -> Vec<Label> {
        viterbi(&self.unary(observations), &self.transition_matrix())
    }

    /// Marginals and best path from one scoring pass.
    pub fn tag(&self, observations: &[Vec<String>]) -> (MarginalTable, Vec<Label>) {
        let unary = self.unary(observations);
        let trans = self.transition_matrix();
        (forward_backward(&unary, &trans).0, viterbi(&unary, &trans))
    }

    /// Unpenalized training log-likelihood at the current weights.
    pub fn log_likelihood(&self, observations: &[Vec<Vec<String>>], labels: &[Vec<Label>]) -> Result<f64> {
        let data = encode_all(&self.index, observations, labels)?;
        Ok(log_likelihood_and_gradient(&self.weights, self.index.len(), &data, f64::INFINITY)?.0)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<CrfModel> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        CrfModel::from_text(&text)
    }

    pub fn to_text(&self) -> String {
        let list = |v: &Option<Vec<String>>| v.as_ref().map_or("*".to_string(), |v| v.join(","));
        let f = &self.features;
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}\t{FORMAT_VERSION}");
        let _ = writeln!(out, "labels\tB,I,O");
        let _ = writeln!(out, "profile\t{}", f.profile);
        let _ = writeln!(out, "templates\t{}", format_templates(&f.templates));
        let _ = writeln!(out, "unigram\t{}", list(&f.selection.unigram));
        let _ = writeln!(out, "conjunction\t{}", list(&f.selection.conjunction));
        let _ = writeln!(out, "gazetteers\t{}", f.gazetteers.join(","));
        let _ = writeln!(out, "extra_columns\t{}", f.extra_columns);
        let _ = writeln!(out, "c\t{}", self.params.c);
        let _ = writeln!(out, "eta\t{}", self.params.eta);
        let _ = writeln!(out, "max_iter\t{}", self.params.max_iter);
        let _ = writeln!(out, "cutoff\t{}", self.params.cutoff);
        let _ = writeln!(out, "iterations\t{}", self.log.iterations.len());
        let _ = writeln!(out, "objective\t{}", self.log.final_objective);
        let _ = writeln!(out, "converged\t{}", self.log.converged);
        let _ = writeln!(out, "features\t{}", self.index.len());
        for (i, feat) in self.index.features.iter().enumerate() {
            for y in Label::ALL {
                let _ = writeln!(out, "{feat}\t{y}\t{}", self.weights[i * N_LABELS + y.index()]);
            }
        }
        for from in Label::ALL {
            for to in Label::ALL {
                let _ = writeln!(
                    out,
                    "{TRANSITION}\t{from}:{to}\t{}",
                    self.weights[self.index.transition_slot(from, to)]
                );
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<CrfModel> {
        let corrupt = |m: String| Error::CorruptedModel(m);
        let mut lines = text.lines();
        let first = lines.next().ok_or_else(|| corrupt("empty model file".into()))?;
        match first.split_once('\t') {
            Some((MAGIC, FORMAT_VERSION)) => {}
            Some((MAGIC, v)) => {
                return Err(Error::VersionMismatch {
                    found: v.to_string(),
                    expected: FORMAT_VERSION.to_string(),
                })
            }
            _ => return Err(corrupt(format!("bad header line {first:?}"))),
        }
        let mut header: BTreeMap<&str, &str> = BTreeMap::new();
        for line in lines.by_ref() {
            let (k, v) = line
                .split_once('\t')
                .ok_or_else(|| corrupt(format!("bad header line {line:?}")))?;
            header.insert(k, v);
            if k == "features" {
                break;
            }
        }
        let get = |k: &str| header.get(k).copied().ok_or_else(|| corrupt(format!("missing header field {k}")));
        let num = |k: &str| -> Result<f64> {
            get(k)?.parse().map_err(|_| corrupt(format!("bad number in header field {k}")))
        };
        let count = |k: &str| -> Result<usize> {
            get(k)?.parse().map_err(|_| corrupt(format!("bad count in header field {k}")))
        };
        if get("labels")? != "B,I,O" {
            return Err(corrupt(format!("unsupported label set {}", get("labels")?)));
        }
        let list = |k: &str| -> Result<Option<Vec<String>>> {
            Ok(match get(k)? {
                "*" => None,
                v => Some(v.split(',').map(String::from).collect()),
            })
        };
        let features = FeatureConfig {
            profile: get("profile")?.parse()?,
            templates: parse_templates(get("templates")?)?,
            selection: FeatureSelection {
                unigram: list("unigram")?,
                conjunction: list("conjunction")?,
            },
            gazetteers: get("gazetteers")?
                .split(',')
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect(),
            extra_columns: count("extra_columns")?,
        };
        let params = CrfParams {
            c: num("c")?,
            eta: num("eta")?,
            max_iter: count("max_iter")?,
            cutoff: count("cutoff")?,
        };
        let n = count("features")?;
        let log = TrainingLog {
            iterations: Vec::new(),
            final_objective: num("objective")?,
            converged: get("converged")? == "true",
        };
        let body: Vec<&str> = lines.collect();
        let expected = n * N_LABELS + N_LABELS * N_LABELS;
        if body.len() != expected {
            return Err(corrupt(format!(
                "{} weight records for {n} features, expected {expected}",
                body.len()
            )));
        }
        let mut names = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(expected);
        for (k, line) in body.iter().enumerate() {
            let parts: Vec<&str> = line.split('\t').collect();
            let [name, label, w] = parts[..] else {
                return Err(corrupt(format!("bad weight record {line:?}")));
            };
            let w: f64 = w.parse().map_err(|_| corrupt(format!("bad weight {w:?}")))?;
            if k < n * N_LABELS {
                let want = Label::from_index(k % N_LABELS);
                if label != want.as_str() {
                    return Err(corrupt(format!("record {line:?}: expected label {want}")));
                }
                if k % N_LABELS == 0 {
                    names.push(name.to_string());
                } else if names.last().map(String::as_str) != Some(name) {
                    return Err(corrupt(format!("record {line:?} breaks feature grouping")));
                }
            } else {
                let t = k - n * N_LABELS;
                let want = format!("{}:{}", Label::from_index(t / N_LABELS), Label::from_index(t % N_LABELS));
                if name != TRANSITION || label != want {
                    return Err(corrupt(format!("record {line:?}: expected transition {want}")));
                }
            }
            weights.push(w);
        }
        if names.windows(2).any(|w| w[0] >= w[1]) {
            return Err(corrupt("feature strings are not strictly sorted".into()));
        }
        Ok(CrfModel {
            index: FeatureIndex::from_sorted(names),
            weights,
            features,
            params,
            log,
        })
    }
}

fn encode_all(index: &FeatureIndex, observations: &[Vec<Vec<String>>], labels: &[Vec<Label>]) -> Result<Vec<EncodedSequence>> {
    if observations.len() != labels.len() {
        return Err(Error::Training(format!(
            "{} observation sequences but {} label sequences",
            observations.len(),
            labels.len()
        )));
    }
    Ok(observations
        .par_iter()
        .zip(labels)
        .map(|(o, l)| EncodedSequence {
            features: index.encode(o),
            labels: Some(l.clone()),
        })
        .collect())
}

/// Builds the index and fits weights from observation strings and gold labels.
pub fn train(
    observations: &[Vec<Vec<String>>],
    labels: &[Vec<Label>],
    features: FeatureConfig,
    params: &CrfParams,
) -> Result<CrfModel> {
    params.validate()?;
    let index = FeatureIndex::build(observations, params.cutoff)?;
    let data = encode_all(&index, observations, labels)?;
    let n = index.len();
    let c = params.c;
    let (weights, log) = train::lbfgs(vec![0.0; index.n_weights()], params.eta, params.max_iter, |w| {
        log_likelihood_and_gradient(w, n, &data, c)
    })?;
    Ok(CrfModel {
        index,
        weights,
        features,
        params: params.clone(),
        log,
    })
}
