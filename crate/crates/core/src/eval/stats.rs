use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use crate::error::{Error, Result};

/// Paired t-test outcome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TTest {
    Statistic { t: f64, df: f64, p_two_sided: f64, mean_diff: f64 },
    /// Differences have zero variance, so `t` is undefined.
    Degenerate { mean_diff: f64 },
}

pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!("paired samples differ in length: {} vs {}", a.len(), b.len())));
    }
    if a.len() < 2 {
        return Err(Error::InvalidInput("paired t-test needs at least 2 pairs".into()));
    }
    let n = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let scale = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if var.sqrt() <= 1e-12 * scale || scale == 0.0 {
        return Ok(TTest::Degenerate { mean_diff: mean });
    }
    let t = mean / (var / n).sqrt();
    let df = n - 1.0;
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(TTest::Statistic {
        t,
        df,
        p_two_sided: p,
        mean_diff: mean,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Anova {
    pub f: f64,
    pub df_between: f64,
    pub df_within: f64,
    pub p: f64,
}

/// One-way ANOVA. Zero within-group variance gives `F = 0, p = 1` when the
/// means agree and `F = inf, p = 0` otherwise.
pub fn one_way_anova(groups: &[Vec<f64>]) -> Result<Anova> {
    if groups.len() < 2 {
        return Err(Error::InvalidInput("ANOVA needs at least 2 groups".into()));
    }
    if let Some(i) = groups.iter().position(|g| g.len() < 2) {
        return Err(Error::InvalidInput(format!("ANOVA group {i} has fewer than 2 values")));
    }
    let k = groups.len() as f64;
    let n: f64 = groups.iter().map(|g| g.len() as f64).sum();
    let grand = groups.iter().flatten().sum::<f64>() / n;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in groups {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ssb += g.len() as f64 * (m - grand).powi(2);
        ssw += g.iter().map(|x| (x - m).powi(2)).sum::<f64>();
    }
    let (df_between, df_within) = (k - 1.0, n - k);
    let scale = groups.iter().flatten().map(|x| x * x).sum::<f64>().max(1.0);
    let tiny = 1e-24 * scale;
    if ssw <= tiny {
        let (f, p) = if ssb <= tiny { (0.0, 1.0) } else { (f64::INFINITY, 0.0) };
        return Ok(Anova { f, df_between, df_within, p });
    }
    let f = (ssb / df_between) / (ssw / df_within);
    let dist = FisherSnedecor::new(df_between, df_within).map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(Anova {
        f,
        df_between,
        df_within,
        p: dist.sf(f),
    })
}
