//! Post-processing of CRF output: prior-based correction, BIO repair and
//! confident-prior label switching.

mod prior;

use std::fmt;
use std::str::FromStr;

pub use prior::{PriorCounts, PriorTable, MIN_IN_SPAN};

use crate::corpus::{Label, Token};
use crate::crf::MarginalTable;
use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.87;

fn argmax(row: &[f64; 3]) -> Label {
    let mut best = 0;
    for y in 1..3 {
        if row[y] > row[best] {
            best = y;
        }
    }
    Label::from_index(best)
}

fn averaged(row: &[f64; 3], prior: &[f64; 3]) -> [f64; 3] {
    [(row[0] + prior[0]) / 2.0, (row[1] + prior[1]) / 2.0, (row[2] + prior[2]) / 2.0]
}

/// Averages each marginal row with the token's prior; rows of tokens without
/// a prior are kept. Labels are the per-row argmax.
pub fn probabilistic_correction(
    marginals: &MarginalTable,
    tokens: &[Token],
    priors: &PriorTable,
) -> (MarginalTable, Vec<Label>) {
    let rows: Vec<[f64; 3]> = marginals
        .rows
        .iter()
        .zip(tokens)
        .map(|(row, tok)| match priors.prior(&tok.surface) {
            Some(p) => averaged(row, &p),
            None => *row,
        })
        .collect();
    let labels = rows.iter().map(argmax).collect();
    (
        MarginalTable {
            rows,
            log_z: marginals.log_z,
        },
        labels,
    )
}

pub(crate) fn fix_in_place(labels: &mut [Label], punct: &[bool]) {
    if labels.first() == Some(&Label::I) {
        labels[0] = Label::B;
    }
    for i in 1..labels.len() {
        if labels[i] == Label::I && labels[i - 1] == Label::O {
            labels[i - 1] = Label::B;
        }
    }
    for i in 1..labels.len() {
        if labels[i] == Label::B && labels[i - 1] != Label::O && !punct[i] && !punct[i - 1] {
            labels[i] = Label::I;
        }
    }
}

/// Rewrites `O I` as `B I` and a leading `I` as `B`, then joins a `B` onto a directly
/// preceding expression unless either token is punctuation.
///
/// Panics if `labels` and `tokens` differ in length.
pub fn bio_fixer(labels: &[Label], tokens: &[Token]) -> Vec<Label> {
    assert_eq!(labels.len(), tokens.len(), "bio_fixer: labels and tokens differ in length");
    let punct: Vec<bool> = tokens.iter().map(Token::is_punctuation).collect();
    let mut out = labels.to_vec();
    fix_in_place(&mut out, &punct);
    out
}

/// Replaces a label with the prior's argmax when that prior exceeds `threshold`.
///
/// Panics if `labels` and `tokens` differ in length.
pub fn threshold_label_switcher(labels: &[Label], tokens: &[Token], priors: &PriorTable, threshold: f64) -> Vec<Label> {
    assert_eq!(labels.len(), tokens.len(), "threshold_label_switcher: labels and tokens differ in length");
    labels
        .iter()
        .zip(tokens)
        .map(|(&label, tok)| match priors.prior(&tok.surface) {
            Some(p) if p.iter().copied().fold(f64::NEG_INFINITY, f64::max) > threshold => argmax(&p),
            _ => label,
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    ProbCorrection,
    BioFixer,
    ThresholdSwitcher,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::ProbCorrection => "prob_correction",
            Stage::BioFixer => "bio_fixer",
            Stage::ThresholdSwitcher => "threshold_switcher",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Stage> {
        [Stage::ProbCorrection, Stage::BioFixer, Stage::ThresholdSwitcher]
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::UnknownStage(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub threshold: f64,
    pub stages: Vec<Stage>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            threshold: DEFAULT_THRESHOLD,
            stages: vec![Stage::ProbCorrection, Stage::BioFixer, Stage::ThresholdSwitcher, Stage::BioFixer],
        }
    }
}

impl PipelineConfig {
    /// Parses stage names in order.
    pub fn with_stage_names<S: AsRef<str>>(threshold: f64, names: &[S]) -> Result<PipelineConfig> {
        let stages = names.iter().map(|s| s.as_ref().parse()).collect::<Result<_>>()?;
        let cfg = PipelineConfig { threshold, stages };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Threshold in `[0, 1]`; a non-empty order ending with `bio_fixer`.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::Config(format!("threshold {} outside [0, 1]", self.threshold)));
        }
        if self.stages.last() != Some(&Stage::BioFixer) {
            return Err(Error::Config("pipeline must end with bio_fixer".into()));
        }
        Ok(())
    }
}

/// Applies the configured stages to decoder output.
///
/// `labels` is the decoder's path. The correction stage only relabels tokens
/// that have a prior; others keep their current label.
pub fn run_pipeline(
    marginals: &MarginalTable,
    labels: &[Label],
    tokens: &[Token],
    priors: &PriorTable,
    config: &PipelineConfig,
) -> Result<Vec<Label>> {
    config.validate()?;
    if marginals.len() != tokens.len() || labels.len() != tokens.len() {
        return Err(Error::InvalidInput(format!(
            "pipeline input lengths differ: {} marginal rows, {} labels, {} tokens",
            marginals.len(),
            labels.len(),
            tokens.len()
        )));
    }
    let mut table = marginals.clone();
    let mut current = labels.to_vec();
    for stage in &config.stages {
        current = match stage {
            Stage::ProbCorrection => {
                let (t, argmax) = probabilistic_correction(&table, tokens, priors);
                table = t;
                current
                    .iter()
                    .zip(argmax)
                    .zip(tokens)
                    .map(|((&old, new), tok)| if priors.prior(&tok.surface).is_some() { new } else { old })
                    .collect()
            }
            Stage::BioFixer => bio_fixer(&current, tokens),
            Stage::ThresholdSwitcher => threshold_label_switcher(&current, tokens, priors, config.threshold),
        };
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{is_valid_bio, tokenize, Sequence};
    use proptest::prelude::*;
    use Label::*;

    fn toks(text: &str) -> Vec<Token> {
        tokenize(text)
    }

    fn priors(rows: &[(&str, [u64; 3])]) -> PriorTable {
        let text: String = rows
            .iter()
            .map(|(t, c)| format!("{t}\t{}\t{}\t{}\t{}\n", c[0], c[1], c[2], c[0] + c[1]))
            .collect();
        PriorTable::from_tsv(&text).unwrap()
    }

    fn table(rows: Vec<[f64; 3]>) -> MarginalTable {
        MarginalTable { rows, log_z: 0.0 }
    }

    #[test]
    fn correction_averages() {
        let p = priors(&[("yesterday", [8, 1, 1])]);
        let (t, l) = probabilistic_correction(&table(vec![[0.2, 0.1, 0.7]]), &toks("yesterday"), &p);
        let want = [0.5, 0.1, 0.4];
        for y in 0..3 {
            assert!((t.rows[0][y] - want[y]).abs() < 1e-12);
        }
        assert_eq!(l, [B]);
    }

    #[test]
    fn correction_leaves_absent_and_equal_rows() {
        let p = priors(&[("ago", [0, 3, 1])]);
        let m = table(vec![[0.3, 0.3, 0.4], [0.0, 0.75, 0.25]]);
        let (t, l) = probabilistic_correction(&m, &toks("then ago"), &p);
        assert_eq!(t.rows, m.rows);
        assert_eq!(l, [O, I]);
    }

    #[test]
    fn fixer_worked_examples() {
        assert_eq!(bio_fixer(&[O, I, I, O], &toks("Three days ago .")), [B, I, I, O]);
        assert_eq!(bio_fixer(&[B, B], &toks("Wednesday morning")), [B, I]);
        assert_eq!(bio_fixer(&[B, O, B], &toks("Friday . Monday")), [B, O, B]);
        assert_eq!(bio_fixer(&[B, B], &toks("Friday ,")), [B, B]);
        assert_eq!(bio_fixer(&[I], &toks("today")), [B]);
        assert_eq!(bio_fixer(&[O, O, I, O, I], &toks("a b c , e")), [O, B, I, B, I]);
        assert_eq!(bio_fixer(&[O, O, I, O, I], &toks("a b c d e")), [O, B, I, I, I]);
    }

    #[test]
    fn switcher_is_strict() {
        let p = priors(&[("yesterday", [95, 3, 2]), ("week", [80, 20, 0]), ("exact", [87, 13, 0])]);
        let t = toks("yesterday week exact other");
        assert_eq!(threshold_label_switcher(&[O, O, O, O], &t, &p, 0.87), [B, O, O, O]);
        assert_eq!(threshold_label_switcher(&[O, O, O, O], &t, &p, 0.0), [B, B, B, O]);
    }

    #[test]
    fn pipeline_configs() {
        let t = toks("Three days ago .");
        let m = table(vec![[1.0 / 3.0; 3]; 4]);
        let raw = [O, I, I, O];
        let empty = PriorTable::default();
        let out = run_pipeline(&m, &raw, &t, &empty, &PipelineConfig::default()).unwrap();
        assert_eq!(out, bio_fixer(&raw, &t));
        let single = PipelineConfig::with_stage_names(0.87, &["bio_fixer"]).unwrap();
        assert_eq!(run_pipeline(&m, &raw, &t, &empty, &single).unwrap(), bio_fixer(&raw, &t));
        assert!(matches!(
            PipelineConfig::with_stage_names(0.87, &["bio_fixer", "smoother"]),
            Err(Error::UnknownStage(_))
        ));
        assert!(PipelineConfig::with_stage_names(0.87, &["threshold_switcher"]).is_err());
        assert!(PipelineConfig::with_stage_names(1.5, &["bio_fixer"]).is_err());
        assert!(run_pipeline(&m, &raw[..3], &t, &empty, &single).is_err());
    }

    #[test]
    fn pipeline_uses_priors() {
        let p = priors(&[("ago", [0, 9, 1]), ("yesterday", [19, 0, 1])]);
        let t = toks("three days ago and yesterday");
        let m = table(vec![[0.6, 0.2, 0.2], [0.1, 0.6, 0.3], [0.1, 0.3, 0.6], [0.0, 0.0, 1.0], [0.1, 0.1, 0.8]]);
        let raw = [B, I, O, O, O];
        let out = run_pipeline(&m, &raw, &t, &p, &PipelineConfig::default()).unwrap();
        assert_eq!(out, [B, I, I, O, B]);
    }

    fn labels_strategy(max: usize) -> impl Strategy<Value = Vec<Label>> {
        proptest::collection::vec((0usize..3).prop_map(Label::from_index), 0..max)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]
        #[test]
        fn fixer_valid_and_idempotent(labels in labels_strategy(20), punct in proptest::collection::vec(proptest::bool::ANY, 20)) {
            let words: Vec<&str> = (0..labels.len()).map(|i| if punct[i] { "," } else { "w" }).collect();
            let t = toks(&words.join(" "));
            let once = bio_fixer(&labels, &t);
            prop_assert!(is_valid_bio(&once));
            prop_assert_eq!(bio_fixer(&once, &t), once);
        }

        #[test]
        fn correction_keeps_rows_normalized(raw in proptest::collection::vec(proptest::array::uniform3(0.001f64..1.0), 1..10)) {
            let rows: Vec<[f64; 3]> = raw.iter().map(|r| { let s: f64 = r.iter().sum(); r.map(|x| x / s) }).collect();
            let words: Vec<String> = (0..rows.len()).map(|i| if i % 2 == 0 { "ago".into() } else { format!("w{i}") }).collect();
            let t = toks(&words.join(" "));
            let p = priors(&[("ago", [1, 5, 2])]);
            let (out, _) = probabilistic_correction(&table(rows), &t, &p);
            for r in &out.rows {
                prop_assert!((r.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            }
        }

        #[test]
        fn switcher_identity_at_one(labels in labels_strategy(12)) {
            let words: Vec<String> = (0..labels.len()).map(|i| ["ago", "today", "x"][i % 3].to_string()).collect();
            let t = toks(&words.join(" "));
            let p = priors(&[("ago", [0, 7, 0]), ("today", [4, 0, 0])]);
            prop_assert_eq!(threshold_label_switcher(&labels, &t, &p, 1.0), labels);
        }

        #[test]
        fn pipeline_output_valid(labels in labels_strategy(12), theta in 0.0f64..=1.0) {
            let words: Vec<String> = (0..labels.len()).map(|i| ["ago", "today", ".", "x"][i % 4].to_string()).collect();
            let t = toks(&words.join(" "));
            let p = priors(&[("ago", [0, 7, 1]), ("today", [4, 0, 0])]);
            let m = table(vec![[0.2, 0.3, 0.5]; labels.len()]);
            let cfg = PipelineConfig { threshold: theta, ..PipelineConfig::default() };
            let out = run_pipeline(&m, &labels, &t, &p, &cfg).unwrap();
            prop_assert!(is_valid_bio(&out));
        }
    }

    #[test]
    fn sequence_level_use() {
        let s = Sequence::new(toks("Wednesday morning"));
        assert_eq!(bio_fixer(&[B, B], &s.tokens), [B, I]);
    }
}
