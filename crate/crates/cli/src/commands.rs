use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use chronotag::config::RunConfig;
use chronotag::corpus::{
    emit_inline_spans, emit_inline_timex, format_attrs, format_corpus, parse_corpus, read_attrs, read_corpus,
    tokenize, write_attrs, write_corpus, AttrKey, Document, GoldAttrs, Sequence,
};
use chronotag::crf::CrfModel;
use chronotag::eval::{evaluate, AnnotatedSpan};
use chronotag::normalizer::{Normalizer, TimexType};
use chronotag::pipeline::{
    extra_column_count, feature_config, gold_annotated, run_cv, sentences, spans_from_labels, train_model,
    Resources, Tagger,
};
use chronotag::postproc::PriorTable;
use chronotag::{synth, Error, Result};

use crate::{Command, GlobalArgs, InputFormat, OutputFormat, RulesAction};

/// Runs one command, returning the warnings it raised.
pub fn run(command: &Command, cfg: &RunConfig, global: &GlobalArgs) -> Result<Vec<String>> {
    match command {
        Command::Train {
            corpora,
            priors_from,
            model,
        } => train(cfg, corpora, priors_from, model),
        Command::Tag {
            model,
            input,
            input_format,
            format,
            dct,
            priors,
            output,
            attrs,
        } => {
            let format = format.unwrap_or(match input_format {
                InputFormat::Text => OutputFormat::Inline,
                InputFormat::Columns => OutputFormat::Columns,
            });
            let opts = TagOptions {
                input,
                input_format: *input_format,
                format,
                dct: *dct,
                priors: priors.as_deref(),
                output: output.as_deref(),
                attrs: attrs.as_deref(),
            };
            tag(cfg, global, model, &opts)
        }
        Command::Normalize { dct, expressions } => normalize(cfg, dct, expressions),
        Command::Evaluate {
            gold,
            gold_attrs,
            pred,
            pred_attrs,
            tsv,
        } => evaluate_cmd(gold, gold_attrs.as_deref(), pred, pred_attrs.as_deref(), tsv.as_deref()),
        Command::Cv { corpus, out } => cv(cfg, corpus, out),
        Command::Priors { corpus, output } => {
            let docs = read_corpus(corpus)?;
            PriorTable::build(docs.iter().flat_map(|d| d.sequences.iter()))?.save(output)?;
            Ok(Vec::new())
        }
        Command::Rules { action: RulesAction::Dump } => {
            emit(None, &normalizer(cfg)?.dump())?;
            Ok(Vec::new())
        }
        Command::Synth {
            sentences,
            output,
            attrs,
        } => {
            let corpus = synth::generate(*sentences, cfg.seed);
            write_corpus(&corpus.documents, output)?;
            if let Some(path) = attrs {
                write_attrs(&corpus.attrs, path)?;
            }
            Ok(Vec::new())
        }
    }
}

/// `<path><suffix>`, keeping the original extension.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Error::io("<stdin>", e))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
    }
}

fn normalizer(cfg: &RunConfig) -> Result<Normalizer> {
    let opts = cfg.normalizer_options();
    match &cfg.paths.rules {
        Some(path) => Normalizer::from_override_file(path, opts),
        None => Ok(Normalizer::default().with_options(opts)),
    }
}

fn read_all(paths: &[PathBuf]) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for p in paths {
        docs.extend(read_corpus(p)?);
    }
    Ok(docs)
}

fn train(cfg: &RunConfig, corpora: &[PathBuf], priors_from: &[PathBuf], model_path: &Path) -> Result<Vec<String>> {
    if cfg.profile.uses_gazetteers() && cfg.paths.gazetteers.is_none() {
        return Err(Error::Config(format!("profile {} needs paths.gazetteers", cfg.profile)));
    }
    let docs = read_all(corpora)?;
    let seqs = sentences(&docs);
    if seqs.is_empty() {
        return Err(Error::InvalidInput("training corpus has no sentences".into()));
    }
    let resources = Resources::from_config(cfg)?;
    let fc = feature_config(cfg, cfg.profile, &resources, extra_column_count(&seqs));
    let extractor = resources.extractor(fc)?;
    let refs: Vec<&Sequence> = seqs.iter().collect();
    let model = train_model(&refs, &extractor, &cfg.crf_params())?;
    model.save(model_path)?;

    let prior_docs = if priors_from.is_empty() { docs } else { read_all(priors_from)? };
    let priors = PriorTable::build(prior_docs.iter().flat_map(|d| d.sequences.iter()))?;
    priors.save(sibling(model_path, ".priors.tsv"))?;

    let summary = training_summary(&model, seqs.len(), priors.len());
    let summary_path = sibling(model_path, ".summary.txt");
    std::fs::write(&summary_path, &summary).map_err(|e| Error::io(&summary_path, e))?;
    emit(None, &summary)?;
    let mut warnings = Vec::new();
    if !model.log.converged {
        warnings.push(format!("optimizer stopped after {} iterations without converging", cfg.crf.max_iter));
    }
    Ok(warnings)
}

fn training_summary(model: &CrfModel, sentences: usize, priors: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "profile\t{}", model.features.profile);
    let _ = writeln!(out, "sentences\t{sentences}");
    let _ = writeln!(out, "features\t{}", model.index.len());
    let _ = writeln!(out, "weights\t{}", model.weights.len());
    let _ = writeln!(out, "iterations\t{}", model.log.iterations.len());
    let _ = writeln!(out, "objective\t{:.6}", model.log.final_objective);
    let _ = writeln!(out, "converged\t{}", model.log.converged);
    let _ = writeln!(out, "prior_tokens\t{priors}");
    let _ = writeln!(out, "[feature catalog]");
    for name in model.features.feature_names() {
        let _ = writeln!(out, "{name}");
    }
    out
}

struct TagOptions<'a> {
    input: &'a Path,
    input_format: InputFormat,
    format: OutputFormat,
    dct: Option<chronotag::normalizer::Anchor>,
    priors: Option<&'a Path>,
    output: Option<&'a Path>,
    attrs: Option<&'a Path>,
}

fn tag(cfg: &RunConfig, global: &GlobalArgs, model_path: &Path, opts: &TagOptions) -> Result<Vec<String>> {
    let model = CrfModel::load(model_path)?;
    if let Some(p) = global.profile {
        if p != model.features.profile {
            return Err(Error::Config(format!(
                "model was trained with profile {}, not {p}",
                model.features.profile
            )));
        }
    }
    let resources = Resources::from_config(cfg)?;
    let mut tagger = Tagger::new(model, &resources)?;
    if cfg.pipeline.enabled {
        let path = opts
            .priors
            .map(Path::to_path_buf)
            .or_else(|| cfg.paths.priors.clone())
            .unwrap_or_else(|| sibling(model_path, ".priors.tsv"));
        tagger = tagger.with_pipeline(PriorTable::load(&path)?, cfg.pipeline_config())?;
    }

    let text = read_input(opts.input)?;
    let mut docs = match opts.input_format {
        InputFormat::Columns => parse_corpus(&text)?,
        InputFormat::Text if text.trim().is_empty() => Vec::new(),
        InputFormat::Text => {
            // Only normalization reads the creation time.
            let dct = match (&opts.dct, cfg.normalize.enabled) {
                (Some(d), _) => *d,
                (None, false) => chronotag::normalizer::Anchor::from_ymd(1970, 1, 1).expect("valid date"),
                (None, true) => return Err(Error::InvalidInput("raw text input needs --dct".into())),
            };
            let id = opts
                .input
                .file_stem()
                .filter(|_| opts.input != Path::new("-"))
                .map_or_else(|| "stdin".to_string(), |s| s.to_string_lossy().into_owned());
            vec![Document::from_text(id, dct, &text)]
        }
    };
    let norm = normalizer(cfg)?;
    let mut warnings = Vec::new();
    let mut rendered = String::new();
    let mut attrs = GoldAttrs::new();
    let mut found = 0;
    for doc in &mut docs {
        let labels = tagger.label_document(doc)?;
        let spans = spans_from_labels(doc, &labels);
        found += spans.len();
        let timexes = if cfg.normalize.enabled {
            let normalized = norm.normalize_spans(doc, &spans, cfg.normalize.fallback);
            for span in &normalized.unmatched {
                let seq = &doc.sequences[span.sequence_index];
                let surface: Vec<&str> = span.tokens(seq).iter().map(|t| t.surface.as_str()).collect();
                warnings.push(format!("{}: no normalization rule for `{}`", doc.id, surface.join(" ")));
            }
            Some(normalized.timexes)
        } else {
            None
        };
        match opts.format {
            OutputFormat::Inline => {
                let s = match &timexes {
                    Some(t) => emit_inline_timex(doc, t)?,
                    None => emit_inline_spans(doc, &spans)?,
                };
                rendered.push_str(&s);
                if opts.input_format == InputFormat::Columns && !s.ends_with('\n') {
                    rendered.push('\n');
                }
            }
            OutputFormat::Columns => {
                for (seq, l) in doc.sequences.iter_mut().zip(labels) {
                    seq.set_labels(l)?;
                }
                for t in timexes.iter().flatten() {
                    attrs.insert(
                        AttrKey {
                            doc_id: doc.id.clone(),
                            span: doc.char_span(&t.span),
                        },
                        (t.timex_type, t.value.clone()),
                    );
                }
            }
        }
    }
    if opts.format == OutputFormat::Columns {
        rendered = format_corpus(&docs);
        if let Some(path) = opts.attrs {
            std::fs::write(path, format_attrs(&attrs)).map_err(|e| Error::io(path, e))?;
        }
    }
    emit(opts.output, &rendered)?;
    if found == 0 && docs.iter().any(|d| d.token_count() > 0) {
        warnings.push("no temporal expressions found".into());
    }
    Ok(warnings)
}

fn normalize(cfg: &RunConfig, dct: &chronotag::normalizer::Anchor, expressions: &[String]) -> Result<Vec<String>> {
    let lines: Vec<String> = if expressions.is_empty() {
        read_input(Path::new("-"))?
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(str::to_string)
            .collect()
    } else {
        expressions.to_vec()
    };
    let norm = normalizer(cfg)?;
    let mut out = String::new();
    let mut warnings = Vec::new();
    for expr in &lines {
        let tokens: Vec<String> = tokenize(expr).into_iter().map(|t| t.surface).collect();
        match norm.normalize(&tokens, dct) {
            Some(n) => {
                let _ = writeln!(out, "{expr}\t{}\t{}\t{}", n.timex_type, n.value, n.rule_id);
            }
            None => {
                warnings.push(format!("no normalization rule for `{expr}`"));
                if cfg.normalize.fallback {
                    let _ = writeln!(out, "{expr}\t{}\tPRESENT_REF\tfallback", TimexType::Date);
                } else {
                    let _ = writeln!(out, "{expr}\t_\t_\t_");
                }
            }
        }
    }
    emit(None, &out)?;
    Ok(warnings)
}

fn annotated(corpus: &Path, attrs: Option<&Path>) -> Result<BTreeMap<String, Vec<AnnotatedSpan>>> {
    let docs = read_corpus(corpus)?;
    let attrs = match attrs {
        Some(p) => read_attrs(p)?,
        None => GoldAttrs::new(),
    };
    let mut out = BTreeMap::new();
    for doc in &docs {
        if out.insert(doc.id.clone(), gold_annotated(doc, &attrs)).is_some() {
            return Err(Error::InvalidInput(format!("{}: duplicate document id {}", corpus.display(), doc.id)));
        }
    }
    Ok(out)
}

fn evaluate_cmd(
    gold: &Path,
    gold_attrs: Option<&Path>,
    pred: &Path,
    pred_attrs: Option<&Path>,
    tsv: Option<&Path>,
) -> Result<Vec<String>> {
    let report = evaluate(&annotated(gold, gold_attrs)?, &annotated(pred, pred_attrs)?)?;
    emit(None, &report.to_table())?;
    if let Some(path) = tsv {
        std::fs::write(path, report.to_tsv()).map_err(|e| Error::io(path, e))?;
    }
    let mut warnings = Vec::new();
    if report.strict_counts.predicted == 0 {
        warnings.push("prediction file contains no expressions".into());
    }
    if report.value_accuracy.warning {
        warnings.push("no aligned pair carried gold attributes".into());
    }
    Ok(warnings)
}

fn cv(cfg: &RunConfig, corpus: &Path, out: &Path) -> Result<Vec<String>> {
    let docs = read_corpus(corpus)?;
    let seqs = sentences(&docs);
    let outcome = run_cv(&seqs, cfg, &Resources::from_config(cfg)?)?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    for (name, body) in [
        ("folds.tsv", outcome.folds_tsv()),
        ("matrix.tsv", outcome.matrix_tsv()),
        ("summary.txt", outcome.summary()),
    ] {
        let path = out.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    emit(None, &outcome.summary())?;
    Ok(Vec::new())
}
