//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use chronotag::config::RunConfig;
use chronotag::corpus::{is_valid_bio, tokenize, Label, Sequence, Token};
use chronotag::crf::{forward_backward, log_likelihood_and_gradient, path_score, viterbi, EncodedSequence, CrfParams};
use chronotag::eval::{one_way_anova, overall_score, paired_t_test, Prf, Score, TTest};
use chronotag::features::FeatureProfile;
use chronotag::normalizer::{validate_value, Anchor, Normalizer, TimexType};
use chronotag::pipeline::{feature_config, run_cv, sentences, train_and_score, Resources};
use chronotag::postproc::{bio_fixer, threshold_label_switcher, PipelineConfig, PriorTable};
use chronotag::synth;

const LABELS: [Label; 3] = [Label::B, Label::I, Label::O];

/// Reference system scores: strict P/R/F1, lenient P/R/F1, type, value, overall.
const TABLE: [[f64; 9]; 6] = [
    [78.57, 63.77, 70.40, 97.32, 78.99, 87.20, 88.99, 77.06, 67.20],
    [79.82, 65.94, 72.22, 97.37, 80.43, 88.10, 87.38, 75.68, 66.67],
    [76.07, 64.49, 69.80, 94.87, 80.43, 87.06, 87.39, 77.48, 67.45],
    [78.86, 70.29, 74.33, 95.12, 84.78, 89.66, 86.31, 76.92, 68.97],
    [77.68, 63.04, 69.60, 97.32, 78.99, 87.20, 88.99, 77.06, 67.20],
    [81.98, 65.94, 73.09, 98.20, 78.99, 87.55, 90.83, 77.98, 68.27],
];

/// SplitMix64, local to the tests so the oracles share nothing with the crate.
struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn below(&mut self, n: usize) -> usize {
        (self.next() % n as u64) as usize
    }

    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<(), String> {
    let took = start.elapsed();
    check(took < budget, || format!("took {took:?}, budget {budget:?}"))
}

fn table_overall() -> Result<(), String> {
    for (i, row) in TABLE.iter().enumerate() {
        let got = overall_score(Score::percent(row[5]), Score::percent(row[7])).map_err(|e| e.to_string())?;
        check((got.value - row[8]).abs() <= 0.02, || {
            format!("run {}: {} x {} -> {:.4}, table {}", i + 1, row[5], row[7], got.value, row[8])
        })?;
    }
    Ok(())
}

fn table_prf() -> Result<(), String> {
    for (i, row) in TABLE.iter().enumerate() {
        for (name, base) in [("strict", 0), ("lenient", 3)] {
            let got = Prf::from_precision_recall(row[base], row[base + 1]).f1;
            check((got - row[base + 2]).abs() <= 0.01, || {
                format!("run {} {name}: F1 {got:.4}, table {}", i + 1, row[base + 2])
            })?;
        }
    }
    Ok(())
}

fn all_paths(n: usize) -> Vec<Vec<Label>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                LABELS.iter().map(move |&l| {
                    let mut q = p.clone();
                    q.push(l);
                    q
                })
            })
            .collect();
    }
    out
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn brute_score(unary: &[[f64; 3]], trans: &[[f64; 3]; 3], path: &[Label]) -> f64 {
    let mut s = 0.0;
    for (t, l) in path.iter().enumerate() {
        s += unary[t][l.index()];
        if t > 0 {
            s += trans[path[t - 1].index()][l.index()];
        }
    }
    s
}

fn crf_suite() -> Result<(), String> {
    let start = Instant::now();
    let mut rng = Rng(490);
    for model in 0..100 {
        let n = 1 + rng.below(6);
        let unary: Vec<[f64; 3]> = (0..n)
            .map(|_| [rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)])
            .collect();
        let mut trans = [[0.0; 3]; 3];
        for row in trans.iter_mut() {
            for v in row.iter_mut() {
                *v = rng.uniform(-3.0, 3.0);
            }
        }
        let paths = all_paths(n);
        let scores: Vec<f64> = paths.iter().map(|p| brute_score(&unary, &trans, p)).collect();
        let log_z = log_sum_exp(&scores);
        let (table, _) = forward_backward(&unary, &trans);
        check(((table.log_z - log_z) / log_z.abs().max(1.0)).abs() <= 1e-8, || {
            format!("model {model}: logZ {} vs {}", table.log_z, log_z)
        })?;
        for t in 0..n {
            for y in 0..3 {
                let m: f64 = paths
                    .iter()
                    .zip(&scores)
                    .filter(|(p, _)| p[t].index() == y)
                    .map(|(_, s)| (s - log_z).exp())
                    .sum();
                let got = table.rows[t][y];
                check((got - m).abs() <= 1e-8 * m.abs().max(1e-300) || (got - m).abs() < 1e-15, || {
                    format!("model {model}: marginal[{t}][{y}] {got} vs {m}")
                })?;
            }
        }
        let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let decoded = viterbi(&unary, &trans);
        let decoded_score = path_score(&unary, &trans, &decoded);
        check((brute_score(&unary, &trans, &decoded) - best).abs() <= 1e-9, || {
            format!("model {model}: viterbi score {decoded_score} vs best {best}")
        })?;
    }

    let n_features = 25;
    let data: Vec<EncodedSequence> = (0..6)
        .map(|_| {
            let len = 2 + rng.below(5);
            let features = (0..len)
                .map(|_| (0..3).map(|_| rng.below(n_features) as u32).collect())
                .collect();
            let labels = (0..len).map(|_| LABELS[rng.below(3)]).collect();
            EncodedSequence { features, labels: Some(labels) }
        })
        .collect();
    let n_weights = n_features * 3 + 9;
    check(n_weights <= 100, || format!("{n_weights} weights"))?;
    let w: Vec<f64> = (0..n_weights).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let (_, grad) = log_likelihood_and_gradient(&w, n_features, &data, 1.0).map_err(|e| e.to_string())?;
    let h = 1e-5;
    for i in 0..n_weights {
        let mut plus = w.clone();
        plus[i] += h;
        let mut minus = w.clone();
        minus[i] -= h;
        let fp = log_likelihood_and_gradient(&plus, n_features, &data, 1.0).map_err(|e| e.to_string())?.0;
        let fm = log_likelihood_and_gradient(&minus, n_features, &data, 1.0).map_err(|e| e.to_string())?.0;
        let fd = (fp - fm) / (2.0 * h);
        check((fd - grad[i]).abs() <= 1e-6, || format!("weight {i}: analytic {} vs numeric {fd}", grad[i]))?;
    }
    within_budget(start, Duration::from_secs(60))
}

fn words(ws: &[&str]) -> Vec<Token> {
    let mut pos = 0;
    ws.iter()
        .map(|w| {
            let t = Token::new(*w, pos);
            pos += w.chars().count() + 1;
            t
        })
        .collect()
}

fn postproc_suite() -> Result<(), String> {
    let mut rng = Rng(7);
    let vocab = ["in", "May", ",", "2013", "-", "days", "."];
    for case in 0..10_000 {
        let n = rng.below(12);
        let labels: Vec<Label> = (0..n).map(|_| LABELS[rng.below(3)]).collect();
        let toks = words(&(0..n).map(|_| vocab[rng.below(vocab.len())]).collect::<Vec<_>>());
        let once = bio_fixer(&labels, &toks);
        let twice = bio_fixer(&once, &toks);
        check(is_valid_bio(&once), || format!("case {case}: {labels:?} -> invalid {once:?}"))?;
        check(once == twice, || format!("case {case}: not idempotent {once:?} -> {twice:?}"))?;
    }

    let toks = words(&["Three", "days", "ago"]);
    let got = bio_fixer(&[Label::O, Label::I, Label::I], &toks);
    check(got == [Label::B, Label::I, Label::I], || format!("Three days ago -> {got:?}"))?;
    let toks = words(&["Wednesday", "morning"]);
    let got = bio_fixer(&[Label::B, Label::B], &toks);
    check(got == [Label::B, Label::I], || format!("Wednesday morning -> {got:?}"))?;

    let table_for = |b_count: usize| -> Result<PriorTable, String> {
        let seqs: Vec<Sequence> = (0..100)
            .map(|i| {
                let label = if i < b_count { Label::B } else { Label::O };
                Sequence::labeled(words(&["week"]), vec![label]).unwrap()
            })
            .collect();
        PriorTable::build(seqs.iter()).map_err(|e| e.to_string())
    };
    let toks = words(&["week"]);
    let at = threshold_label_switcher(&[Label::O], &toks, &table_for(87)?, 0.87);
    check(at == [Label::O], || "prior 0.87 switched at threshold 0.87".into())?;
    let above = threshold_label_switcher(&[Label::O], &toks, &table_for(88)?, 0.87);
    check(above == [Label::B], || "prior 0.88 not switched at threshold 0.87".into())
}

fn end_to_end() -> Result<(), String> {
    let start = Instant::now();
    let corpus = synth::generate(250, 490);
    let seqs = sentences(&corpus.documents);
    check(seqs.len() == 250, || format!("{} sentences", seqs.len()))?;
    let train: Vec<&Sequence> = seqs[..200].iter().collect();
    let test: Vec<&Sequence> = seqs[200..].iter().collect();
    let cfg = RunConfig::default();
    let res = Resources::default();
    let extractor = res
        .extractor(feature_config(&cfg, FeatureProfile::Model1, &res, 0))
        .map_err(|e| e.to_string())?;
    let (raw, post) = train_and_score(&train, &test, &extractor, &CrfParams::default(), &PipelineConfig::default())
        .map_err(|e| e.to_string())?;
    println!(
        "  model1 strict F1 {:.4}, with pipeline {:.4}, {:?}",
        raw.strict.f1,
        post.strict.f1,
        start.elapsed()
    );
    check(raw.strict.f1 >= 0.95, || format!("strict F1 {:.4} < 0.95", raw.strict.f1))?;
    check(post.strict.f1 >= raw.strict.f1, || {
        format!("pipeline lowered strict F1: {:.4} -> {:.4}", raw.strict.f1, post.strict.f1)
    })?;
    within_budget(start, Duration::from_secs(120))
}

fn surfaces(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(|t| t.surface).collect()
}

fn normalizer_suite() -> Result<(), String> {
    let norm = Normalizer::default();
    let rows: Vec<&str> = include_str!("fixtures/normalizer_200.tsv")
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .collect();
    check(rows.len() == 200, || format!("fixture has {} rows", rows.len()))?;
    for row in rows {
        let cols: Vec<&str> = row.split('\t').collect();
        let anchor: NaiveDate = cols[1].parse().map_err(|e| format!("{row}: {e}"))?;
        let n = norm
            .normalize(&surfaces(cols[0]), &Anchor::new(anchor))
            .ok_or_else(|| format!("no value for `{}`", cols[0]))?;
        check(validate_value(n.timex_type, &n.value), || format!("`{}` -> malformed {}", cols[0], n.value))?;
    }

    let anchor = Anchor::from_ymd(2013, 4, 11).unwrap();
    let examples: [(&[&str], TimexType, &str); 5] = [
        (&["tomorrow"], TimexType::Date, "2013-04-12"),
        (&["three", "days", "ago"], TimexType::Date, "2013-04-08"),
        (&["daily"], TimexType::Set, "P1D"),
        (&["the", "1990s"], TimexType::Date, "199"),
        (&["now"], TimexType::Date, "PRESENT_REF"),
    ];
    for (tokens, ty, value) in examples {
        let got = norm.normalize(tokens, &anchor).map(|n| (n.timex_type, n.value));
        check(got == Some((ty, value.to_string())), || format!("{tokens:?} -> {got:?}"))?;
    }

    let family: [(&[&str], i64); 7] = [
        (&["today"], 0),
        (&["yesterday"], -1),
        (&["tomorrow"], 1),
        (&["two", "days", "ago"], -2),
        (&["5", "days", "later"], 5),
        (&["four", "days", "earlier"], -4),
        (&["three", "days", "ahead"], 3),
    ];
    let mut rng = Rng(11);
    let base = NaiveDate::from_ymd_opt(1990, 1, 1).unwrap();
    for _ in 0..50 {
        let a = base + chrono::Duration::days(rng.below(15_000) as i64);
        let k = rng.below(800) as i64 - 400;
        let b = a + chrono::Duration::days(k);
        for (tokens, _) in family {
            let va = norm.normalize(tokens, &Anchor::new(a)).ok_or_else(|| format!("{tokens:?} @ {a}"))?;
            let vb = norm.normalize(tokens, &Anchor::new(b)).ok_or_else(|| format!("{tokens:?} @ {b}"))?;
            let da: NaiveDate = va.value.parse().map_err(|e| format!("{}: {e}", va.value))?;
            let db: NaiveDate = vb.value.parse().map_err(|e| format!("{}: {e}", vb.value))?;
            check(db - da == chrono::Duration::days(k), || {
                format!("{tokens:?}: anchors {a} / {b} gave {da} / {db}")
            })?;
        }
    }
    Ok(())
}

/// Two-sided p for Student t with 3 degrees of freedom, closed form.
fn t3_two_sided(t: f64) -> f64 {
    let s = 3f64.sqrt();
    let x = t.abs() / s;
    let cdf = 0.5 + (x / (1.0 + x * x) + x.atan()) / std::f64::consts::PI;
    2.0 * (1.0 - cdf)
}

fn ln_gamma_half_integer(two_x: u32) -> f64 {
    // Gamma(n/2) by recurrence from Gamma(1/2) or Gamma(1).
    let mut v: f64 = if two_x % 2 == 0 { 0.0 } else { std::f64::consts::PI.sqrt().ln() };
    let mut k = if two_x % 2 == 0 { 2 } else { 1 };
    while k < two_x {
        v += (k as f64 / 2.0).ln();
        k += 2;
    }
    v
}

/// Upper tail of the F distribution by Simpson integration of its density
/// over `[0, f]`, substituting `x = u^2` to smooth the origin.
fn f_upper_tail(f: f64, d1: u32, d2: u32) -> f64 {
    let (a, b) = (d1 as f64, d2 as f64);
    let ln_beta = ln_gamma_half_integer(d1) + ln_gamma_half_integer(d2) - ln_gamma_half_integer(d1 + d2);
    let pdf = |x: f64| -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let ln = 0.5 * (a * (a * x).ln() + b * b.ln() - (a + b) * (a * x + b).ln()) - x.ln() - ln_beta;
        ln.exp()
    };
    let g = |u: f64| pdf(u * u) * 2.0 * u;
    let upper = f.sqrt();
    let n = 200_000;
    let h = upper / n as f64;
    let mut sum = g(0.0) + g(upper);
    for i in 1..n {
        sum += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    1.0 - sum * h / 3.0
}

fn statistics_suite() -> Result<(), String> {
    let a = [2.1, 2.5, 1.9, 2.8];
    let b = [2.0, 2.1, 1.8, 2.2];
    let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / 4.0;
    let sd = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 3.0).sqrt();
    let t_ref = mean / (sd / 2.0);
    let p_ref = t3_two_sided(t_ref);
    match paired_t_test(&a, &b).map_err(|e| e.to_string())? {
        TTest::Statistic { t, df, p_two_sided, .. } => {
            check((t - t_ref).abs() <= 1e-6, || format!("t {t} vs {t_ref}"))?;
            check(df == 3.0, || format!("df {df}"))?;
            check((p_two_sided - p_ref).abs() <= 1e-6, || format!("p {p_two_sided} vs {p_ref}"))?;
        }
        other => return Err(format!("unexpected {other:?}")),
    }
    for (x, y) in [([1.0, 2.0, 3.0], [0.0, 1.0, 2.0]), ([4.0, 4.0, 4.0], [4.0, 4.0, 4.0])] {
        let got = paired_t_test(&x, &y).map_err(|e| e.to_string())?;
        check(matches!(got, TTest::Degenerate { .. }), || format!("{x:?} vs {y:?} -> {got:?}"))?;
    }

    let groups = vec![
        vec![6.0, 8.0, 4.0, 5.0, 3.0],
        vec![8.0, 12.0, 9.0, 11.0, 6.0],
        vec![13.0, 9.0, 11.0, 8.0, 7.0],
        vec![5.0, 7.0, 9.0, 6.0, 4.0],
    ];
    let all: Vec<f64> = groups.iter().flatten().copied().collect();
    let grand = all.iter().sum::<f64>() / all.len() as f64;
    let (mut ssb, mut ssw) = (0.0, 0.0);
    for g in &groups {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ssb += g.len() as f64 * (m - grand).powi(2);
        ssw += g.iter().map(|x| (x - m).powi(2)).sum::<f64>();
    }
    let f_ref = (ssb / 3.0) / (ssw / 16.0);
    let p_ref = f_upper_tail(f_ref, 3, 16);
    let got = one_way_anova(&groups).map_err(|e| e.to_string())?;
    check((got.f - f_ref).abs() <= 1e-6, || format!("F {} vs {f_ref}", got.f))?;
    check((got.p - p_ref).abs() <= 1e-6, || format!("p {} vs {p_ref}", got.p))?;
    check(got.df_between == 3.0 && got.df_within == 16.0, || format!("{got:?}"))?;

    let flat = one_way_anova(&[vec![2.0, 2.0], vec![2.0, 2.0], vec![2.0, 2.0]]).map_err(|e| e.to_string())?;
    check(flat.f == 0.0 && flat.p == 1.0, || format!("constant groups -> {flat:?}"))?;
    let same = one_way_anova(&[vec![1.0, 3.0], vec![3.0, 1.0]]).map_err(|e| e.to_string())?;
    check(same.f.abs() < 1e-12, || format!("equal means -> {same:?}"))
}

fn determinism() -> Result<(), String> {
    let corpus = synth::generate(60, 490);
    let seqs = sentences(&corpus.documents);
    let mut cfg = RunConfig::default();
    cfg.seed = 490;
    cfg.crf.max_iter = 30;
    let res = Resources::default();
    let a = run_cv(&seqs, &cfg, &res).map_err(|e| e.to_string())?;
    let b = run_cv(&seqs, &cfg, &res).map_err(|e| e.to_string())?;
    check(a.rows.len() == 50, || format!("{} rows", a.rows.len()))?;
    check(a.folds_tsv() == b.folds_tsv(), || "fold assignments differ".into())?;
    check(a.matrix_tsv() == b.matrix_tsv(), || "fold matrices differ".into())?;
    check(a.summary() == b.summary(), || "summaries differ".into())
}

type Criterion = fn() -> Result<(), String>;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 8] = [
        ("overall score matches the reference scores", table_overall),
        ("prf matches the reference F1 scores", table_prf),
        ("CRF inference and gradient match brute force", crf_suite),
        ("post-processing properties", postproc_suite),
        ("synthetic end-to-end experiment", end_to_end),
        ("normalizer conformance", normalizer_suite),
        ("statistics match hand computation", statistics_suite),
        ("cross-validation is deterministic", determinism),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(()) => println!("PASS {name}"),
            Err(e) => {
                failed += 1;
                println!("FAIL {name}: {e}");
            }
        }
    }
    println!("{} of {} criteria passed", 8 - failed, 8);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
