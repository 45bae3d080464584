use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::sync::OnceLock;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chronotag"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// A corpus and a model trained on it, shared by the tests.
struct Fixture {
    _dir: tempfile::TempDir,
    corpus: PathBuf,
    attrs: PathBuf,
    model: PathBuf,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("train.tsv");
        let attrs = dir.path().join("train.attrs");
        let model = dir.path().join("model.crf");
        let o = run(&["synth", "--sentences", "200", "-o", p(&corpus), "--attrs", p(&attrs)]);
        assert!(o.status.success(), "{o:?}");
        let o = run(&["--profile", "model1", "train", "--corpus", p(&corpus), "--model", p(&model)]);
        assert!(o.status.success(), "{o:?}");
        Fixture {
            _dir: dir,
            corpus,
            attrs,
            model,
        }
    })
}

#[test]
fn train_writes_model_priors_and_catalog() {
    let f = fixture();
    assert!(f.model.exists());
    let priors = std::fs::read_to_string(format!("{}.priors.tsv", f.model.display())).unwrap();
    assert!(priors.lines().any(|l| l.starts_with("ago\t")));
    let summary = std::fs::read_to_string(format!("{}.summary.txt", f.model.display())).unwrap();
    let catalog: Vec<&str> = summary.split("[feature catalog]\n").nth(1).unwrap().lines().collect();
    assert!(catalog.contains(&"word"));
    assert!(!catalog.contains(&"chunk"));
    assert!(!catalog.iter().any(|n| n.starts_with("gaz_") || n.starts_with("extra")));
}

#[test]
fn tag_wraps_expression() {
    let f = fixture();
    let o = run_stdin(&["tag", "--model", p(&f.model), "--dct", "2013-04-11", "-"], "I arrived three days ago.");
    assert!(o.status.success(), "{o:?}");
    assert_eq!(
        stdout(&o),
        "I arrived <TIMEX3 tid=\"t1\" type=\"DATE\" value=\"2013-04-08\">three days ago</TIMEX3>."
    );
}

#[test]
fn tag_toggles_and_empty_input() {
    let f = fixture();
    let text = "The board met on May 12 , 2011 and again yesterday .";
    let with = run_stdin(&["tag", "--model", p(&f.model), "--dct", "2013-04-11", "-"], text);
    let without = run_stdin(&["--no-pipeline", "tag", "--model", p(&f.model), "--dct", "2013-04-11", "-"], text);
    assert!(with.status.success() && without.status.success());
    let bare = run_stdin(&["--no-normalize", "tag", "--model", p(&f.model), "-"], text);
    assert!(bare.status.success(), "{bare:?}");
    assert!(stdout(&bare).contains("<TIMEX3 tid=\"t1\">"));
    let empty = run_stdin(&["tag", "--model", p(&f.model), "-"], "");
    assert!(empty.status.success());
    assert_eq!(stdout(&empty), "");
}

#[test]
fn tag_rejects_profile_mismatch() {
    let f = fixture();
    let o = run_stdin(&["--profile", "model2", "tag", "--model", p(&f.model), "--dct", "2013-04-11", "-"], "today");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn evaluate_gold_against_itself() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let tsv = dir.path().join("report.tsv");
    let o = run(&[
        "evaluate",
        "--gold",
        p(&f.corpus),
        "--gold-attrs",
        p(&f.attrs),
        "--pred",
        p(&f.corpus),
        "--pred-attrs",
        p(&f.attrs),
        "--tsv",
        p(&tsv),
    ]);
    assert!(o.status.success(), "{o:?}");
    let report = std::fs::read_to_string(&tsv).unwrap();
    for line in report.lines().skip(1) {
        assert!(line.ends_with("\t100.0000"), "{line}");
    }
}

#[test]
fn tagged_corpus_scores_well() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let test = dir.path().join("test.tsv");
    let test_attrs = dir.path().join("test.attrs");
    let pred = dir.path().join("pred.tsv");
    let pred_attrs = dir.path().join("pred.attrs");
    let o = run(&["--seed", "7", "synth", "--sentences", "40", "-o", p(&test), "--attrs", p(&test_attrs)]);
    assert!(o.status.success());
    let o = run(&[
        "tag",
        "--model",
        p(&f.model),
        "--input-format",
        "columns",
        p(&test),
        "-o",
        p(&pred),
        "--attrs",
        p(&pred_attrs),
    ]);
    assert!(o.status.success(), "{o:?}");
    let o = run(&[
        "evaluate",
        "--gold",
        p(&test),
        "--gold-attrs",
        p(&test_attrs),
        "--pred",
        p(&pred),
        "--pred-attrs",
        p(&pred_attrs),
    ]);
    assert!(o.status.success(), "{o:?}");
    let table = stdout(&o);
    let strict: f64 = table
        .lines()
        .find(|l| l.starts_with("strict"))
        .and_then(|l| l.split_whitespace().last())
        .unwrap()
        .parse()
        .unwrap();
    assert!(strict >= 95.0, "{table}");
}

#[test]
fn evaluate_reports_unmatched_ids() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let other = dir.path().join("other.tsv");
    let text = std::fs::read_to_string(&f.corpus).unwrap().replacen("#doc synth000", "#doc elsewhere", 1);
    std::fs::write(&other, text).unwrap();
    let o = run(&["evaluate", "--gold", p(&f.corpus), "--pred", p(&other)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("elsewhere") && err.contains("synth000"), "{err}");
}

#[test]
fn normalize_and_strict_warnings() {
    let o = run(&["normalize", "--dct", "2013-04-11", "tomorrow", "the 1990s"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("tomorrow\tDATE\t2013-04-12"));
    assert!(out.contains("the 1990s\tDATE\t199\t"));
    let o = run(&["normalize", "--dct", "2013-04-11", "zebra"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["--strict", "normalize", "--dct", "2013-04-11", "zebra"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["--fallback", "normalize", "--dct", "2013-04-11", "zebra"]);
    assert!(stdout(&o).contains("zebra\tDATE\tPRESENT_REF"));
}

#[test]
fn cv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.tsv");
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 490\n[crf]\nmax_iter = 20\n[cv]\nfolds = 3\nrepeats = 2\n").unwrap();
    assert!(run(&["synth", "--sentences", "30", "-o", p(&corpus)]).status.success());
    let outs: Vec<PathBuf> = (0..2).map(|i| dir.path().join(format!("out{i}"))).collect();
    for out in &outs {
        let o = run(&["--config", p(&cfg), "cv", "--corpus", p(&corpus), "--out", p(out)]);
        assert!(o.status.success(), "{o:?}");
    }
    for name in ["folds.tsv", "matrix.tsv", "summary.txt"] {
        let a = std::fs::read(outs[0].join(name)).unwrap();
        let b = std::fs::read(outs[1].join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
    let matrix = std::fs::read_to_string(outs[0].join("matrix.tsv")).unwrap();
    assert_eq!(matrix.lines().count(), 1 + 2 * 6);
    let summary = std::fs::read_to_string(outs[0].join("summary.txt")).unwrap();
    assert!(!summary.contains("ANOVA"));
}

#[test]
fn cv_rejects_tiny_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.tsv");
    assert!(run(&["synth", "--sentences", "5", "-o", p(&corpus)]).status.success());
    let o = run(&["cv", "--corpus", p(&corpus), "--out", p(&dir.path().join("out"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gazetteer_profile_needs_gazetteers() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "--profile",
        "model3",
        "train",
        "--corpus",
        p(&f.corpus),
        "--model",
        p(&dir.path().join("m")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["train", "--corpus", "/nonexistent/corpus.tsv", "--model", p(&dir.path().join("m"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn priors_and_rules_dump() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("priors.tsv");
    assert!(run(&["priors", "--corpus", p(&f.corpus), "-o", p(&out)]).status.success());
    let built = std::fs::read_to_string(&out).unwrap();
    let from_train = std::fs::read_to_string(format!("{}.priors.tsv", f.model.display())).unwrap();
    assert_eq!(built, from_train);
    let o = run(&["rules", "dump"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l.starts_with("tomorrow\t")));
}

#[test]
fn gazetteer_profile_trains_and_tags() {
    let f = fixture();
    let dir = tempfile::tempdir().unwrap();
    let gaz = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/gazetteers");
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!("profile = \"model3\"\n[crf]\nmax_iter = 30\n[paths]\ngazetteers = \"{}\"\n", gaz.display()),
    )
    .unwrap();
    let model = dir.path().join("m3.crf");
    let o = run(&["--config", p(&cfg), "train", "--corpus", p(&f.corpus), "--model", p(&model)]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).lines().any(|l| l == "gaz_cities"));
    let o = run_stdin(
        &["--config", p(&cfg), "tag", "--model", p(&model), "--dct", "2013-04-11", "-"],
        "They met in Paris yesterday .",
    );
    assert!(o.status.success(), "{o:?}");
    let o = run_stdin(&["tag", "--model", p(&model), "--dct", "2013-04-11", "-"], "yesterday");
    assert_eq!(o.status.code(), Some(2), "gazetteers missing from the config");
}
