//! Span matching, attribute accuracy, overall score, data splitting and
//! significance tests.

mod split;
mod stats;

use std::collections::BTreeMap;
use std::fmt::Write as _;

pub use split::{cross_validate, fold_assignment, permutation, shuffle_and_split, FoldResult};
pub use stats::{one_way_anova, paired_t_test, Anova, TTest};

use crate::corpus::CharSpan;
use crate::error::{Error, Result};
use crate::normalizer::TimexType;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Identical character extents.
    Strict,
    /// Any character overlap, aligned one-to-one left to right.
    Lenient,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MatchCounts {
    pub true_positives: usize,
    pub predicted: usize,
    pub gold: usize,
}

impl MatchCounts {
    pub fn add(&mut self, other: MatchCounts) {
        self.true_positives += other.true_positives;
        self.predicted += other.predicted;
        self.gold += other.gold;
    }
}

/// Counts plus the aligned `(gold index, predicted index)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Matching {
    pub counts: MatchCounts,
    pub pairs: Vec<(usize, usize)>,
}

fn check_disjoint(spans: &[CharSpan]) -> Result<Vec<usize>> {
    let mut order: Vec<usize> = (0..spans.len()).collect();
    order.sort_by_key(|&i| (spans[i].start, spans[i].end));
    for w in order.windows(2) {
        if spans[w[0]].overlaps(&spans[w[1]]) {
            return Err(Error::Overlap {
                first: spans[w[0]].to_string(),
                second: spans[w[1]].to_string(),
            });
        }
    }
    Ok(order)
}

/// Aligns predicted spans with gold spans of one document.
pub fn match_spans(gold: &[CharSpan], pred: &[CharSpan], regime: Regime) -> Result<Matching> {
    let gold_order = check_disjoint(gold)?;
    let pred_order = check_disjoint(pred)?;
    let mut used = vec![false; gold.len()];
    let mut pairs = Vec::new();
    for &p in &pred_order {
        let hit = gold_order.iter().copied().find(|&g| {
            !used[g]
                && match regime {
                    Regime::Strict => gold[g] == pred[p],
                    Regime::Lenient => gold[g].overlaps(&pred[p]),
                }
        });
        if let Some(g) = hit {
            used[g] = true;
            pairs.push((g, p));
        }
    }
    Ok(Matching {
        counts: MatchCounts {
            true_positives: pairs.len(),
            predicted: pred.len(),
            gold: gold.len(),
        },
        pairs,
    })
}

/// Precision, recall and F1 on whatever scale the inputs use.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn from_precision_recall(precision: f64, recall: f64) -> Prf {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Prf { precision, recall, f1 }
    }
}

/// Fractions in `[0, 1]`; empty denominators give 0.
pub fn prf(counts: MatchCounts) -> Prf {
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Prf::from_precision_recall(
        ratio(counts.true_positives, counts.predicted),
        ratio(counts.true_positives, counts.gold),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Attribute {
    Type,
    Value,
}

/// Accuracy over aligned pairs; `warning` is set when no pair was scorable.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Accuracy {
    pub value: f64,
    pub correct: usize,
    pub total: usize,
    pub warning: bool,
}

/// A span with optional normalization attributes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotatedSpan {
    pub span: CharSpan,
    pub timex_type: Option<TimexType>,
    pub value: Option<String>,
}

impl AnnotatedSpan {
    pub fn bare(span: CharSpan) -> AnnotatedSpan {
        AnnotatedSpan { span, timex_type: None, value: None }
    }

    fn attribute(&self, attr: Attribute) -> Option<String> {
        match attr {
            Attribute::Type => self.timex_type.map(|t| t.to_string()),
            Attribute::Value => self.value.clone(),
        }
    }
}

/// Fraction of aligned pairs whose attribute strings are equal. Pairs whose
/// gold side lacks the attribute are skipped; a missing prediction is wrong.
pub fn attribute_accuracy(
    pairs: &[(usize, usize)],
    gold: &[AnnotatedSpan],
    pred: &[AnnotatedSpan],
    attr: Attribute,
) -> Accuracy {
    let mut acc = Accuracy::default();
    for &(g, p) in pairs {
        let Some(want) = gold[g].attribute(attr) else { continue };
        acc.total += 1;
        if pred[p].attribute(attr).as_ref() == Some(&want) {
            acc.correct += 1;
        }
    }
    finish(acc)
}

fn finish(mut acc: Accuracy) -> Accuracy {
    if acc.total == 0 {
        acc.value = 0.0;
        acc.warning = true;
    } else {
        acc.value = acc.correct as f64 / acc.total as f64;
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Fraction,
    Percent,
}

/// A metric tagged with its scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Score {
    pub value: f64,
    pub scale: Scale,
}

impl Score {
    pub fn fraction(value: f64) -> Score {
        Score { value, scale: Scale::Fraction }
    }

    pub fn percent(value: f64) -> Score {
        Score { value, scale: Scale::Percent }
    }
}

/// Lenient F1 times value accuracy, on the inputs' scale.
pub fn overall_score(lenient_f1: Score, value_accuracy: Score) -> Result<Score> {
    if lenient_f1.scale != value_accuracy.scale {
        return Err(Error::InvalidInput("overall score inputs use different scales".into()));
    }
    let top = match lenient_f1.scale {
        Scale::Fraction => 1.0,
        Scale::Percent => 100.0,
    };
    for v in [lenient_f1.value, value_accuracy.value] {
        if !(0.0..=top).contains(&v) {
            return Err(Error::InvalidInput(format!("score {v} outside [0, {top}]")));
        }
    }
    Ok(Score {
        value: lenient_f1.value * value_accuracy.value / top,
        scale: lenient_f1.scale,
    })
}

/// Every metric for one gold/prediction comparison, as fractions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalReport {
    pub strict_counts: MatchCounts,
    pub lenient_counts: MatchCounts,
    pub strict: Prf,
    pub lenient: Prf,
    pub type_accuracy: Accuracy,
    pub value_accuracy: Accuracy,
    pub overall: f64,
}

impl EvalReport {
    /// `(metric, fraction)` rows in report order.
    pub fn metrics(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("strict_precision", self.strict.precision),
            ("strict_recall", self.strict.recall),
            ("strict_f1", self.strict.f1),
            ("lenient_precision", self.lenient.precision),
            ("lenient_recall", self.lenient.recall),
            ("lenient_f1", self.lenient.f1),
            ("type_accuracy", self.type_accuracy.value),
            ("value_accuracy", self.value_accuracy.value),
            ("overall", self.overall),
        ]
    }

    /// `metric<TAB>value` lines, values as percentages with four decimals.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("metric\tvalue\n");
        for (name, v) in self.metrics() {
            let _ = writeln!(out, "{name}\t{:.4}", v * 100.0);
        }
        out
    }

    /// Aligned text table in percentages.
    pub fn to_table(&self) -> String {
        let pct = |v: f64| format!("{:6.2}", v * 100.0);
        let mut out = String::new();
        let _ = writeln!(out, "{:<10} {:>6} {:>6} {:>6}", "matching", "P", "R", "F1");
        for (name, p) in [("strict", self.strict), ("lenient", self.lenient)] {
            let _ = writeln!(out, "{name:<10} {} {} {}", pct(p.precision), pct(p.recall), pct(p.f1));
        }
        let _ = writeln!(out, "{:<10} {}", "type", pct(self.type_accuracy.value));
        let _ = writeln!(out, "{:<10} {}", "value", pct(self.value_accuracy.value));
        let _ = writeln!(out, "{:<10} {}", "overall", pct(self.overall));
        let _ = writeln!(
            out,
            "gold {} / predicted {} / strict tp {} / lenient tp {}",
            self.strict_counts.gold,
            self.strict_counts.predicted,
            self.strict_counts.true_positives,
            self.lenient_counts.true_positives
        );
        if self.value_accuracy.warning {
            let _ = writeln!(out, "warning: no aligned pair carried gold attributes");
        }
        out
    }
}

/// Scores predictions against gold, both keyed by document id.
pub fn evaluate(
    gold: &BTreeMap<String, Vec<AnnotatedSpan>>,
    pred: &BTreeMap<String, Vec<AnnotatedSpan>>,
) -> Result<EvalReport> {
    let missing: Vec<&str> = gold
        .keys()
        .filter(|k| !pred.contains_key(*k))
        .chain(pred.keys().filter(|k| !gold.contains_key(*k)))
        .map(String::as_str)
        .collect();
    if !missing.is_empty() {
        return Err(Error::InvalidInput(format!("unmatched document ids: {}", missing.join(", "))));
    }
    let mut report = EvalReport::default();
    let mut type_acc = Accuracy::default();
    let mut value_acc = Accuracy::default();
    for (id, g) in gold {
        let p = &pred[id];
        let gs: Vec<CharSpan> = g.iter().map(|s| s.span).collect();
        let ps: Vec<CharSpan> = p.iter().map(|s| s.span).collect();
        report.strict_counts.add(match_spans(&gs, &ps, Regime::Strict)?.counts);
        let lenient = match_spans(&gs, &ps, Regime::Lenient)?;
        report.lenient_counts.add(lenient.counts);
        for (acc, attr) in [(&mut type_acc, Attribute::Type), (&mut value_acc, Attribute::Value)] {
            let a = attribute_accuracy(&lenient.pairs, g, p, attr);
            acc.correct += a.correct;
            acc.total += a.total;
        }
    }
    report.strict = prf(report.strict_counts);
    report.lenient = prf(report.lenient_counts);
    report.type_accuracy = finish(type_acc);
    report.value_accuracy = finish(value_acc);
    report.overall = report.lenient.f1 * report.value_accuracy.value;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spans(v: &[(usize, usize)]) -> Vec<CharSpan> {
        v.iter().map(|&(a, b)| CharSpan::new(a, b)).collect()
    }

    #[test]
    fn identical_lists() {
        let s = spans(&[(0, 3), (5, 9), (12, 20)]);
        for r in [Regime::Strict, Regime::Lenient] {
            assert_eq!(match_spans(&s, &s, r).unwrap().counts.true_positives, 3);
        }
    }

    #[test]
    fn partial_overlap() {
        let gold = spans(&[(4, 20)]);
        let pred = spans(&[(4, 14)]);
        assert_eq!(match_spans(&gold, &pred, Regime::Strict).unwrap().counts.true_positives, 0);
        assert_eq!(match_spans(&gold, &pred, Regime::Lenient).unwrap().counts.true_positives, 1);
    }

    #[test]
    fn one_to_one() {
        let gold = spans(&[(0, 5), (6, 10)]);
        let pred = spans(&[(2, 8)]);
        let m = match_spans(&gold, &pred, Regime::Lenient).unwrap();
        assert_eq!(m.pairs, [(0, 0)]);
        assert!(matches!(
            match_spans(&spans(&[(0, 5), (3, 6)]), &pred, Regime::Strict),
            Err(Error::Overlap { .. })
        ));
    }

    #[test]
    fn prf_values() {
        let p = Prf::from_precision_recall(78.86, 70.29);
        assert!((p.f1 - 74.33).abs() < 0.01);
        let p = Prf::from_precision_recall(95.12, 84.78);
        assert!((p.f1 - 89.66).abs() < 0.01);
        assert_eq!(prf(MatchCounts { true_positives: 0, predicted: 0, gold: 4 }), Prf::default());
    }

    #[test]
    fn accuracies() {
        let g: Vec<AnnotatedSpan> = (0..10)
            .map(|i| AnnotatedSpan {
                span: CharSpan::new(i * 10, i * 10 + 5),
                timex_type: Some(TimexType::Date),
                value: Some(format!("2013-04-{:02}", i + 1)),
            })
            .collect();
        let mut p = g.clone();
        p[3].timex_type = Some(TimexType::Duration);
        let pairs: Vec<(usize, usize)> = (0..10).map(|i| (i, i)).collect();
        assert_eq!(attribute_accuracy(&pairs, &g, &p, Attribute::Type).value, 0.9);
        assert_eq!(attribute_accuracy(&pairs, &g, &g, Attribute::Value).value, 1.0);
        let empty = attribute_accuracy(&[], &g, &p, Attribute::Value);
        assert!(empty.warning && empty.value == 0.0);
        p[0].value = None;
        assert_eq!(attribute_accuracy(&pairs, &g, &p, Attribute::Value).correct, 9);
    }

    #[test]
    fn overall_scales() {
        let s = overall_score(Score::percent(89.66), Score::percent(76.92)).unwrap();
        assert!((s.value - 68.97).abs() < 0.01);
        let s = overall_score(Score::percent(87.20), Score::percent(77.06)).unwrap();
        assert!((s.value - 67.20).abs() < 0.01);
        assert_eq!(overall_score(Score::fraction(1.0), Score::fraction(1.0)).unwrap().value, 1.0);
        assert!(overall_score(Score::fraction(0.9), Score::percent(77.0)).is_err());
        assert!(overall_score(Score::fraction(89.0), Score::fraction(0.7)).is_err());
    }

    #[test]
    fn evaluate_documents() {
        let a = AnnotatedSpan {
            span: CharSpan::new(0, 8),
            timex_type: Some(TimexType::Date),
            value: Some("2013-04-12".into()),
        };
        let gold = BTreeMap::from([("d1".to_string(), vec![a.clone()])]);
        let r = evaluate(&gold, &gold).unwrap();
        assert!(r.metrics().iter().all(|(_, v)| *v == 1.0));
        let empty = BTreeMap::from([("d1".to_string(), vec![])]);
        let r = evaluate(&gold, &empty).unwrap();
        assert_eq!((r.strict.precision, r.strict.recall), (0.0, 0.0));
        let other = BTreeMap::from([("d2".to_string(), vec![a])]);
        let err = evaluate(&gold, &other).unwrap_err().to_string();
        assert!(err.contains("d1") && err.contains("d2"));
        assert!(r.to_tsv().starts_with("metric\tvalue\nstrict_precision\t0.0000\n"));
        assert!(r.to_table().contains("overall"));
    }

    fn disjoint() -> impl Strategy<Value = Vec<CharSpan>> {
        proptest::collection::vec((0usize..4, 1usize..5), 0..8).prop_map(|v| {
            let mut at = 0;
            v.into_iter()
                .map(|(gap, len)| {
                    let s = CharSpan::new(at + gap, at + gap + len);
                    at = s.end;
                    s
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn strict_never_exceeds_lenient(g in disjoint(), p in disjoint()) {
            let s = match_spans(&g, &p, Regime::Strict).unwrap().counts.true_positives;
            let l = match_spans(&g, &p, Regime::Lenient).unwrap().counts;
            prop_assert!(s <= l.true_positives);
            prop_assert!(l.true_positives <= l.predicted.min(l.gold));
        }

        #[test]
        fn prf_scale_consistent(p in 0.0f64..1.0, r in 0.0f64..1.0) {
            let f = Prf::from_precision_recall(p, r).f1;
            let fp = Prf::from_precision_recall(p * 100.0, r * 100.0).f1;
            prop_assert!((f * 100.0 - fp).abs() < 1e-9);
        }
    }
}
