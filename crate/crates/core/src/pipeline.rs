//! End-to-end tagging and the cross-validation experiment.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::corpus::{bio_to_spans, BioMode, Document, GoldAttrs, AttrKey, Label, Sequence, TimexSpan};
use crate::crf::{self, CrfModel, CrfParams};
use crate::error::{Error, Result};
use crate::eval::{self, cross_validate, fold_assignment, one_way_anova, paired_t_test, AnnotatedSpan, Anova, EvalReport, TTest};
use crate::features::{FeatureConfig, FeatureExtractor, FeatureProfile, FeatureSelection, Gazetteer, Lexicons};
use crate::normalizer::Timex;
use crate::postproc::{run_pipeline, PipelineConfig, PriorTable};

/// Lexicons and gazetteers shared by extractors.
#[derive(Clone, Debug)]
pub struct Resources {
    pub lexicons: Arc<Lexicons>,
    pub gazetteers: Arc<Vec<Gazetteer>>,
}

impl Default for Resources {
    fn default() -> Self {
        Resources {
            lexicons: Arc::new(Lexicons::builtin()),
            gazetteers: Arc::new(Vec::new()),
        }
    }
}

impl Resources {
    pub fn from_config(cfg: &RunConfig) -> Result<Resources> {
        let lexicons = match &cfg.paths.lexicons {
            Some(dir) => Lexicons::load_dir(dir)?,
            None => Lexicons::builtin(),
        };
        let gazetteers = match &cfg.paths.gazetteers {
            Some(dir) => Gazetteer::load_dir(dir)?,
            None => Vec::new(),
        };
        Ok(Resources {
            lexicons: Arc::new(lexicons),
            gazetteers: Arc::new(gazetteers),
        })
    }

    pub fn extractor(&self, config: FeatureConfig) -> Result<FeatureExtractor> {
        FeatureExtractor::new(config, self.lexicons.clone(), self.gazetteers.clone())
    }
}

/// Feature setup for `profile` under a run configuration. `extra_columns`
/// is the number of pass-through columns the training data carries.
pub fn feature_config(cfg: &RunConfig, profile: FeatureProfile, resources: &Resources, extra_columns: usize) -> FeatureConfig {
    let mut fc = FeatureConfig::for_profile(profile);
    fc.selection = FeatureSelection {
        unigram: cfg.features.unigram.clone(),
        conjunction: cfg.features.conjunction.clone(),
    };
    if profile.uses_gazetteers() {
        fc.gazetteers = match &cfg.features.gazetteers {
            Some(names) => names.clone(),
            None => resources.gazetteers.iter().map(|g| g.name.clone()).collect(),
        };
    }
    if profile.uses_extra_columns() {
        fc.extra_columns = extra_columns;
    }
    fc
}

/// Largest number of pass-through columns on any token.
pub fn extra_column_count<'a>(seqs: impl IntoIterator<Item = &'a Sequence>) -> usize {
    seqs.into_iter()
        .flat_map(|s| s.tokens.iter())
        .map(|t| t.annotations.extra.len())
        .max()
        .unwrap_or(0)
}

/// Fits a CRF on labelled sequences.
pub fn train_model(seqs: &[&Sequence], extractor: &FeatureExtractor, params: &CrfParams) -> Result<CrfModel> {
    let mut labels = Vec::with_capacity(seqs.len());
    for (i, s) in seqs.iter().enumerate() {
        labels.push(
            s.labels()
                .ok_or_else(|| Error::InvalidInput(format!("training sentence {i} has no labels")))?
                .to_vec(),
        );
    }
    let observations: Vec<Vec<Vec<String>>> = seqs.par_iter().map(|s| extractor.observations(s)).collect();
    crf::train(&observations, &labels, extractor.config().clone(), params)
}

/// A trained model plus optional post-processing.
#[derive(Clone, Debug)]
pub struct Tagger {
    model: CrfModel,
    extractor: FeatureExtractor,
    post: Option<(PriorTable, PipelineConfig)>,
}

impl Tagger {
    /// Fails when the resources cannot produce the model's features.
    pub fn new(model: CrfModel, resources: &Resources) -> Result<Tagger> {
        let extractor = resources.extractor(model.features.clone())?;
        Ok(Tagger {
            model,
            extractor,
            post: None,
        })
    }

    pub fn with_pipeline(mut self, priors: PriorTable, config: PipelineConfig) -> Result<Tagger> {
        config.validate()?;
        self.post = Some((priors, config));
        Ok(self)
    }

    pub fn without_pipeline(mut self) -> Tagger {
        self.post = None;
        self
    }

    pub fn model(&self) -> &CrfModel {
        &self.model
    }

    /// Decoder output, post-processed when a pipeline is set.
    pub fn label(&self, seq: &Sequence) -> Result<Vec<Label>> {
        let obs = self.extractor.observations(seq);
        let (marginals, path) = self.model.tag(&obs);
        match &self.post {
            Some((priors, cfg)) => run_pipeline(&marginals, &path, &seq.tokens, priors, cfg),
            None => Ok(path),
        }
    }

    /// Raw and post-processed labels from one decoding pass.
    pub fn label_both(&self, seq: &Sequence, priors: &PriorTable, cfg: &PipelineConfig) -> Result<(Vec<Label>, Vec<Label>)> {
        let obs = self.extractor.observations(seq);
        let (marginals, path) = self.model.tag(&obs);
        let post = run_pipeline(&marginals, &path, &seq.tokens, priors, cfg)?;
        Ok((path, post))
    }

    pub fn label_document(&self, doc: &Document) -> Result<Vec<Vec<Label>>> {
        doc.sequences.par_iter().map(|s| self.label(s)).collect()
    }

    /// Predicted expression spans of a document.
    pub fn spans(&self, doc: &Document) -> Result<Vec<TimexSpan>> {
        Ok(spans_from_labels(doc, &self.label_document(doc)?))
    }
}

/// Spans from per-sentence labels; orphan `I` labels open a span.
pub fn spans_from_labels(doc: &Document, labels: &[Vec<Label>]) -> Vec<TimexSpan> {
    doc.sequences
        .iter()
        .zip(labels)
        .enumerate()
        .flat_map(|(i, (seq, l))| bio_to_spans(l, seq, i, BioMode::Tolerant).expect("tolerant decoding accepts any labels"))
        .collect()
}

/// Gold spans of a document with attributes looked up by extent.
pub fn gold_annotated(doc: &Document, attrs: &GoldAttrs) -> Vec<AnnotatedSpan> {
    doc.gold_spans()
        .iter()
        .map(|s| {
            let span = doc.char_span(s);
            let found = attrs.get(&AttrKey {
                doc_id: doc.id.clone(),
                span,
            });
            AnnotatedSpan {
                span,
                timex_type: found.map(|(t, _)| *t),
                value: found.map(|(_, v)| v.clone()),
            }
        })
        .collect()
}

/// Normalized predictions as evaluation spans.
pub fn timex_annotated(doc: &Document, timexes: &[Timex]) -> Vec<AnnotatedSpan> {
    timexes
        .iter()
        .map(|t| AnnotatedSpan {
            span: doc.char_span(&t.span),
            timex_type: Some(t.timex_type),
            value: Some(t.value.clone()),
        })
        .collect()
}

fn sentence_report(tests: &[&Sequence], labels: &[Vec<Label>]) -> Result<EvalReport> {
    let mut gold = BTreeMap::new();
    let mut pred = BTreeMap::new();
    for (i, (seq, l)) in tests.iter().zip(labels).enumerate() {
        let key = format!("s{i:06}");
        let to_spans = |spans: Vec<TimexSpan>| -> Vec<AnnotatedSpan> {
            spans.iter().map(|s| AnnotatedSpan::bare(s.char_span(seq))).collect()
        };
        gold.insert(key.clone(), to_spans(seq.gold_spans(0)));
        pred.insert(key, to_spans(bio_to_spans(l, seq, 0, BioMode::Tolerant)?));
    }
    eval::evaluate(&gold, &pred)
}

/// Trains on `train` and scores `test` sentences without and with the
/// pipeline, priors coming from the training sentences.
pub fn train_and_score(
    train: &[&Sequence],
    test: &[&Sequence],
    extractor: &FeatureExtractor,
    params: &CrfParams,
    pipeline: &PipelineConfig,
) -> Result<(EvalReport, EvalReport)> {
    let model = train_model(train, extractor, params)?;
    let priors = PriorTable::build(train.iter().copied())?;
    let tagger = Tagger {
        model,
        extractor: extractor.clone(),
        post: None,
    };
    let both: Vec<(Vec<Label>, Vec<Label>)> = test
        .par_iter()
        .map(|s| tagger.label_both(s, &priors, pipeline))
        .collect::<Result<_>>()?;
    let (raw, post): (Vec<_>, Vec<_>) = both.into_iter().unzip();
    Ok((sentence_report(test, &raw)?, sentence_report(test, &post)?))
}

/// One fold of one repeat for one profile.
#[derive(Clone, Debug, PartialEq)]
pub struct CvRow {
    pub profile: FeatureProfile,
    pub repeat: usize,
    pub fold: usize,
    pub raw: EvalReport,
    pub post: EvalReport,
}

/// Cross-validation results with significance tests.
#[derive(Clone, Debug, PartialEq)]
pub struct CvOutcome {
    pub folds: Vec<Vec<Vec<usize>>>,
    pub rows: Vec<CvRow>,
    /// Pipeline versus raw strict F1, per profile.
    pub t_tests: Vec<(FeatureProfile, TTest)>,
    /// Raw strict F1 across profiles, when more than one was run.
    pub anova: Option<Anova>,
}

/// Repeated k-fold cross-validation over labelled sentences for every
/// profile in the configuration.
pub fn run_cv(sentences: &[Sequence], cfg: &RunConfig, resources: &Resources) -> Result<CvOutcome> {
    cfg.validate()?;
    let (k, repeats, seed) = (cfg.cv.folds, cfg.cv.repeats, cfg.seed);
    let folds = fold_assignment(sentences.len(), k, repeats, seed)?;
    let params = cfg.crf_params();
    let pipeline = cfg.pipeline_config();
    let extra = extra_column_count(sentences);
    let mut rows = Vec::new();
    let mut t_tests = Vec::new();
    let mut groups = Vec::new();
    for profile in cfg.cv_profiles() {
        let extractor = resources.extractor(feature_config(cfg, profile, resources, extra))?;
        let results = cross_validate(sentences, k, repeats, seed, |train, test| {
            train_and_score(train, test, &extractor, &params, &pipeline)
        })?;
        let raw_f1: Vec<f64> = results.iter().map(|r| r.result.0.strict.f1).collect();
        let post_f1: Vec<f64> = results.iter().map(|r| r.result.1.strict.f1).collect();
        if raw_f1.len() >= 2 {
            t_tests.push((profile, paired_t_test(&post_f1, &raw_f1)?));
        }
        groups.push(raw_f1);
        rows.extend(results.into_iter().map(|r| CvRow {
            profile,
            repeat: r.repeat,
            fold: r.fold,
            raw: r.result.0,
            post: r.result.1,
        }));
    }
    let anova = if groups.len() > 1 { Some(one_way_anova(&groups)?) } else { None };
    Ok(CvOutcome {
        folds,
        rows,
        t_tests,
        anova,
    })
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

impl CvOutcome {
    /// `repeat<TAB>fold<TAB>sentence` for every held-out sentence.
    pub fn folds_tsv(&self) -> String {
        let mut out = String::from("repeat\tfold\tsentence\n");
        for (r, rep) in self.folds.iter().enumerate() {
            for (f, fold) in rep.iter().enumerate() {
                for i in fold {
                    let _ = writeln!(out, "{r}\t{f}\t{i}");
                }
            }
        }
        out
    }

    /// Per-fold metrics for both conditions.
    pub fn matrix_tsv(&self) -> String {
        let mut out = String::from(
            "profile\tcondition\trepeat\tfold\tstrict_p\tstrict_r\tstrict_f1\tlenient_p\tlenient_r\tlenient_f1\n",
        );
        for row in &self.rows {
            for (cond, r) in [("crf", &row.raw), ("pipeline", &row.post)] {
                let _ = writeln!(
                    out,
                    "{}\t{cond}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
                    row.profile,
                    row.repeat,
                    row.fold,
                    r.strict.precision,
                    r.strict.recall,
                    r.strict.f1,
                    r.lenient.precision,
                    r.lenient.recall,
                    r.lenient.f1
                );
            }
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let mut profiles: Vec<FeatureProfile> = self.rows.iter().map(|r| r.profile).collect();
        profiles.dedup();
        let _ = writeln!(out, "{:<8} {:>9} {:>8} {:>9} {:>8}", "profile", "crf F1", "sd", "pipe F1", "sd");
        for p in &profiles {
            let rows: Vec<&CvRow> = self.rows.iter().filter(|r| r.profile == *p).collect();
            let raw: Vec<f64> = rows.iter().map(|r| r.raw.strict.f1 * 100.0).collect();
            let post: Vec<f64> = rows.iter().map(|r| r.post.strict.f1 * 100.0).collect();
            let (rm, rs) = mean_sd(&raw);
            let (pm, ps) = mean_sd(&post);
            let _ = writeln!(out, "{p:<8} {rm:>9.2} {rs:>8.2} {pm:>9.2} {ps:>8.2}");
        }
        let _ = writeln!(out);
        for (p, t) in &self.t_tests {
            match t {
                TTest::Statistic { t, df, p_two_sided, mean_diff } => {
                    let _ = writeln!(
                        out,
                        "paired t-test {p} pipeline vs crf: mean diff {:.4}, t = {t:.4}, df = {df}, p = {p_two_sided:.4e}",
                        mean_diff * 100.0
                    );
                }
                TTest::Degenerate { mean_diff } => {
                    let _ = writeln!(
                        out,
                        "paired t-test {p} pipeline vs crf: differences constant ({:.4}), t undefined",
                        mean_diff * 100.0
                    );
                }
            }
        }
        if let Some(a) = &self.anova {
            let _ = writeln!(
                out,
                "one-way ANOVA across profiles (crf strict F1): F({}, {}) = {:.4}, p = {:.4e}",
                a.df_between, a.df_within, a.f, a.p
            );
        }
        out
    }
}

/// Every sentence of a corpus, in document order.
pub fn sentences(docs: &[Document]) -> Vec<Sequence> {
    docs.iter().flat_map(|d| d.sequences.iter().cloned()).collect()
}
