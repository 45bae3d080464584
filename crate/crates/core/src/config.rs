//! Run configuration: a TOML file of sections, overridable from the command line.
//!
//! ```toml
//! seed = 490
//! profile = "model1"
//!
//! [crf]
//! c = 1.0
//! eta = 0.0001
//!
//! [pipeline]
//! enabled = true
//! threshold = 0.87
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::crf::CrfParams;
use crate::error::{Error, Result};
use crate::features::FeatureProfile;
use crate::normalizer::{NormalizerOptions, WeekdayHint};
use crate::postproc::{PipelineConfig, Stage, DEFAULT_THRESHOLD};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub profile: FeatureProfile,
    pub crf: CrfSection,
    pub features: FeaturesSection,
    pub pipeline: PipelineSection,
    pub normalize: NormalizeSection,
    pub paths: PathsSection,
    pub eval: EvalSection,
    pub cv: CvSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 490,
            profile: FeatureProfile::Model1,
            crf: CrfSection::default(),
            features: FeaturesSection::default(),
            pipeline: PipelineSection::default(),
            normalize: NormalizeSection::default(),
            paths: PathsSection::default(),
            eval: EvalSection::default(),
            cv: CvSection::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrfSection {
    pub c: f64,
    pub eta: f64,
    pub max_iter: usize,
    pub cutoff: usize,
}

impl Default for CrfSection {
    fn default() -> Self {
        let p = CrfParams::default();
        CrfSection {
            c: p.c,
            eta: p.eta,
            max_iter: p.max_iter,
            cutoff: p.cutoff,
        }
    }
}

/// Feature names per template kind and gazetteer choice; unset means default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturesSection {
    pub unigram: Option<Vec<String>>,
    pub conjunction: Option<Vec<String>>,
    /// Gazetteer names to use; all loaded ones when unset.
    pub gazetteers: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSection {
    pub enabled: bool,
    pub threshold: f64,
    pub stages: Vec<Stage>,
}

impl Default for PipelineSection {
    fn default() -> Self {
        let p = PipelineConfig::default();
        PipelineSection {
            enabled: true,
            threshold: DEFAULT_THRESHOLD,
            stages: p.stages,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizeSection {
    pub enabled: bool,
    /// Type unmatched expressions as `DATE`/`PRESENT_REF` instead of dropping them.
    pub fallback: bool,
    pub day_first: bool,
    pub weekday_hint: WeekdayHint,
}

impl Default for NormalizeSection {
    fn default() -> Self {
        NormalizeSection {
            enabled: true,
            fallback: false,
            day_first: false,
            weekday_hint: WeekdayHint::Past,
        }
    }
}

/// Resource locations; relative paths resolve against the config file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    pub gazetteers: Option<PathBuf>,
    pub lexicons: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub priors: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    /// Share of sentences kept for training by the split command.
    pub split: f64,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection { split: 0.8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvSection {
    pub folds: usize,
    pub repeats: usize,
    /// Profiles compared by ANOVA; the run profile alone when empty.
    pub profiles: Vec<FeatureProfile>,
}

impl Default for CvSection {
    fn default() -> Self {
        CvSection {
            folds: 10,
            repeats: 5,
            profiles: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads, resolves relative paths and validates.
    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::parse(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        cfg.paths.resolve(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.crf_params().validate()?;
        self.pipeline_config().validate()?;
        if !(self.eval.split > 0.0 && self.eval.split < 1.0) {
            return Err(Error::Config(format!("eval.split {} outside (0, 1)", self.eval.split)));
        }
        if self.cv.folds < 2 {
            return Err(Error::Config("cv.folds must be at least 2".into()));
        }
        if self.cv.repeats == 0 {
            return Err(Error::Config("cv.repeats must be at least 1".into()));
        }
        for (name, p) in self.paths.entries() {
            if !p.exists() {
                return Err(Error::Config(format!("paths.{name}: {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    pub fn crf_params(&self) -> CrfParams {
        CrfParams {
            c: self.crf.c,
            eta: self.crf.eta,
            max_iter: self.crf.max_iter,
            cutoff: self.crf.cutoff,
        }
    }

    pub fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            threshold: self.pipeline.threshold,
            stages: self.pipeline.stages.clone(),
        }
    }

    pub fn normalizer_options(&self) -> NormalizerOptions {
        NormalizerOptions {
            day_first: self.normalize.day_first,
            weekday_hint: self.normalize.weekday_hint,
        }
    }

    /// Profiles for cross-validation.
    pub fn cv_profiles(&self) -> Vec<FeatureProfile> {
        if self.cv.profiles.is_empty() {
            vec![self.profile]
        } else {
            self.cv.profiles.clone()
        }
    }
}

impl PathsSection {
    fn entries(&self) -> impl Iterator<Item = (&'static str, &PathBuf)> {
        [
            ("gazetteers", &self.gazetteers),
            ("lexicons", &self.lexicons),
            ("rules", &self.rules),
            ("priors", &self.priors),
        ]
        .into_iter()
        .filter_map(|(n, p)| p.as_ref().map(|p| (n, p)))
    }

    fn resolve(&mut self, base: &Path) {
        for p in [&mut self.gazetteers, &mut self.lexicons, &mut self.rules, &mut self.priors]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.seed, 490);
        assert_eq!(c.crf_params(), CrfParams::default());
        assert_eq!(c.pipeline_config(), PipelineConfig::default());
        assert_eq!(c.cv_profiles(), [FeatureProfile::Model1]);
    }

    #[test]
    fn full_file() {
        let text = r#"
seed = 7
profile = "model3"

[crf]
c = 10.0
max_iter = 50

[pipeline]
enabled = false
threshold = 0.9
stages = ["bio_fixer"]

[normalize]
weekday_hint = "future"

[cv]
folds = 5
repeats = 2
profiles = ["model1", "model4"]
"#;
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.profile, FeatureProfile::Model3);
        assert_eq!(c.crf.c, 10.0);
        assert_eq!(c.crf.eta, 1e-4);
        assert_eq!(c.pipeline.stages, [Stage::BioFixer]);
        assert_eq!(c.normalize.weekday_hint, WeekdayHint::Future);
        assert_eq!(c.cv_profiles(), [FeatureProfile::Model1, FeatureProfile::Model4]);
        c.validate().unwrap();
        assert_eq!(RunConfig::parse(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunConfig::parse("profile = \"model9\"").is_err());
        assert!(RunConfig::parse("colour = 1").is_err());
        assert!(RunConfig::parse("[pipeline]\nstages = [\"smooth\"]").is_err());
        let c = RunConfig::parse("[pipeline]\nthreshold = 1.2").unwrap();
        assert!(c.validate().is_err());
        let c = RunConfig::parse("[pipeline]\nstages = [\"bio_fixer\", \"threshold_switcher\"]").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn paths_resolve_and_must_exist() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("gaz")).unwrap();
        let cfg = dir.path().join("run.toml");
        std::fs::write(&cfg, "[paths]\ngazetteers = \"gaz\"\n").unwrap();
        let c = RunConfig::load(&cfg).unwrap();
        assert_eq!(c.paths.gazetteers.unwrap(), dir.path().join("gaz"));
        std::fs::write(&cfg, "[paths]\nrules = \"missing.tsv\"\n").unwrap();
        assert!(RunConfig::load(&cfg).is_err());
    }
}
