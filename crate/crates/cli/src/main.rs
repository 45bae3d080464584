mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use chronotag::config::RunConfig;
use chronotag::features::FeatureProfile;
use chronotag::normalizer::Anchor;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Temporal expression tagging and normalization.
#[derive(Parser, Debug)]
#[command(name = "chronotag", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Feature profile: model1, model2, model3 or model4.
    #[arg(long, global = true)]
    profile: Option<FeatureProfile>,
    /// Prior threshold of the label switcher.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Skip post-processing.
    #[arg(long, global = true)]
    no_pipeline: bool,
    /// Skip normalization.
    #[arg(long, global = true)]
    no_normalize: bool,
    /// Keep expressions no rule normalizes, as DATE/PRESENT_REF.
    #[arg(long, global = true)]
    fallback: bool,
    /// Exit with status 1 when warnings were reported.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train a model on labelled column corpora.
    Train {
        /// Training corpus; repeat to combine several.
        #[arg(long = "corpus", required = true)]
        corpora: Vec<PathBuf>,
        /// Human-annotated corpus for the prior table (defaults to the training corpora).
        #[arg(long)]
        priors_from: Vec<PathBuf>,
        /// Output model path. Priors and summary are written next to it.
        #[arg(long)]
        model: PathBuf,
    },
    /// Tag raw text or a column corpus.
    Tag {
        #[arg(long)]
        model: PathBuf,
        /// Input file, or `-` for standard input.
        input: PathBuf,
        /// Input format.
        #[arg(long, value_enum, default_value_t = InputFormat::Text)]
        input_format: InputFormat,
        /// Output format; defaults to inline for text and columns for corpora.
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
        /// Document creation time for raw text input.
        #[arg(long)]
        dct: Option<Anchor>,
        /// Prior table (defaults to the config, then `<model>.priors.tsv`).
        #[arg(long)]
        priors: Option<PathBuf>,
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Attribute sidecar for column output.
        #[arg(long)]
        attrs: Option<PathBuf>,
    },
    /// Normalize expressions, one per line, against an anchor date.
    Normalize {
        #[arg(long)]
        dct: Anchor,
        /// Expressions; read from standard input when absent.
        expressions: Vec<String>,
    },
    /// Score predictions against gold annotations.
    Evaluate {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        gold_attrs: Option<PathBuf>,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        pred_attrs: Option<PathBuf>,
        /// Also write `metric<TAB>value` lines here.
        #[arg(long)]
        tsv: Option<PathBuf>,
    },
    /// Repeated k-fold cross-validation with and without post-processing.
    Cv {
        #[arg(long)]
        corpus: PathBuf,
        /// Directory for folds.tsv, matrix.tsv and summary.txt.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a prior table from a human-annotated corpus.
    Priors {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Inspect normalization rules.
    Rules {
        #[command(subcommand)]
        action: RulesAction,
    },
    /// Generate a synthetic labelled corpus.
    Synth {
        #[arg(long, default_value_t = 250)]
        sentences: usize,
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long)]
        attrs: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum RulesAction {
    /// Print the active rule set.
    Dump,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputFormat {
    Text,
    Columns,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Inline,
    Columns,
}

impl GlobalArgs {
    /// Configuration file (or defaults) with command-line overrides applied.
    fn run_config(&self) -> chronotag::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(profile) = self.profile {
            cfg.profile = profile;
        }
        if let Some(threshold) = self.threshold {
            cfg.pipeline.threshold = threshold;
        }
        if self.no_pipeline {
            cfg.pipeline.enabled = false;
        }
        if self.no_normalize {
            cfg.normalize.enabled = false;
        }
        if self.fallback {
            cfg.normalize.fallback = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = cli
        .global
        .run_config()
        .and_then(|cfg| commands::run(&cli.command, &cfg, &cli.global));
    match outcome {
        Ok(warnings) => {
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            if cli.global.strict && !warnings.is_empty() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
