use rayon::prelude::*;

use super::lattice::forward_backward;
use super::{unary_scores, transitions, EncodedSequence, N_LABELS};
use crate::error::{Error, Result};

const CHUNK: usize = 16;
const HISTORY: usize = 5;
const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACK: usize = 40;

/// Regularized log-likelihood `Σ log p(y|x) − ‖w‖²/(2C)` and its gradient.
///
/// Sequences are summed in fixed-size chunks whose partial results are added
/// in order, so the result does not depend on thread scheduling.
pub fn log_likelihood_and_gradient(
    weights: &[f64],
    n_features: usize,
    data: &[EncodedSequence],
    c: f64,
) -> Result<(f64, Vec<f64>)> {
    let n_weights = n_features * N_LABELS + N_LABELS * N_LABELS;
    if weights.len() != n_weights {
        return Err(Error::Training(format!(
            "weight vector has {} entries, index needs {n_weights}",
            weights.len()
        )));
    }
    for (i, s) in data.iter().enumerate() {
        let labels = s.labels.as_ref().ok_or_else(|| Error::Training(format!("sequence {i} has no labels")))?;
        if labels.len() != s.features.len() {
            return Err(Error::Training(format!(
                "sequence {i}: {} labels for {} positions",
                labels.len(),
                s.features.len()
            )));
        }
        if let Some(f) = s.features.iter().flatten().find(|&&f| f as usize >= n_features) {
            return Err(Error::Training(format!("sequence {i}: feature id {f} out of range")));
        }
    }
    let partials: Vec<(f64, Vec<f64>)> = data
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut grad = vec![0.0; n_weights];
            let mut ll = 0.0;
            for s in chunk {
                ll += accumulate(weights, n_features, s, &mut grad);
            }
            (ll, grad)
        })
        .collect();
    let mut ll = 0.0;
    let mut grad = vec![0.0; n_weights];
    for (l, g) in partials {
        ll += l;
        for (a, b) in grad.iter_mut().zip(g) {
            *a += b;
        }
    }
    let mut sq = 0.0;
    for (g, w) in grad.iter_mut().zip(weights) {
        sq += w * w;
        *g -= w / c;
    }
    Ok((ll - sq / (2.0 * c), grad))
}

/// Adds empirical minus expected counts for one sequence; returns its log-likelihood.
fn accumulate(weights: &[f64], n_features: usize, s: &EncodedSequence, grad: &mut [f64]) -> f64 {
    let labels = s.labels.as_ref().expect("checked by caller");
    if labels.is_empty() {
        return 0.0;
    }
    let unary = unary_scores(weights, &s.features);
    let trans = transitions(weights, n_features);
    let (marg, pair) = forward_backward(&unary, &trans);
    let tbase = n_features * N_LABELS;
    let mut gold = 0.0;
    for (t, feats) in s.features.iter().enumerate() {
        let y = labels[t].index();
        gold += unary[t][y];
        for &f in feats {
            let base = f as usize * N_LABELS;
            grad[base + y] += 1.0;
            for k in 0..N_LABELS {
                grad[base + k] -= marg.rows[t][k];
            }
        }
        if t > 0 {
            let p = labels[t - 1].index();
            gold += trans[p][y];
            grad[tbase + p * N_LABELS + y] += 1.0;
        }
    }
    for i in 0..N_LABELS {
        for j in 0..N_LABELS {
            grad[tbase + i * N_LABELS + j] -= pair[i][j];
        }
    }
    gold - marg.log_z
}

/// One optimizer iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    pub grad_norm: f64,
    pub step: f64,
}

/// What the optimizer did.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingLog {
    pub iterations: Vec<IterationRecord>,
    pub final_objective: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximizes the objective with limited-memory BFGS and Armijo backtracking.
/// Stops when the relative objective change drops below `eta` or after
/// `max_iter` iterations.
pub(crate) fn lbfgs<F>(mut x: Vec<f64>, eta: f64, max_iter: usize, eval: F) -> Result<(Vec<f64>, TrainingLog)>
where
    F: Fn(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    // Minimize f = -objective.
    let neg = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
        let (v, g) = eval(x)?;
        if !v.is_finite() || g.iter().any(|g| !g.is_finite()) {
            return Err(Error::Training(format!("non-finite objective {v}")));
        }
        Ok((-v, g.into_iter().map(|g| -g).collect()))
    };
    let (mut f, mut g) = neg(&x)?;
    let mut log = TrainingLog {
        final_objective: -f,
        ..TrainingLog::default()
    };
    let mut hist: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    for iteration in 1..=max_iter {
        let gnorm = dot(&g, &g).sqrt();
        if gnorm == 0.0 {
            log.converged = true;
            break;
        }
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &d);
            for (di, yi) in d.iter_mut().zip(y) {
                *di -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = hist.last() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &d);
            for (di, si) in d.iter_mut().zip(s) {
                *di += (a - b) * si;
            }
        }
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            hist.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let mut step = if hist.is_empty() { 1.0 / gnorm } else { 1.0 };
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACK {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let (fn_, gn) = neg(&xn)?;
            if fn_ <= f + ARMIJO * step * slope {
                accepted = Some((xn, fn_, gn));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fn_, gn)) = accepted else {
            // No decrease possible along the search direction: a stationary point to numerical precision.
            log.converged = true;
            break;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 {
            if hist.len() == HISTORY {
                hist.remove(0);
            }
            hist.push((s, y, 1.0 / sy));
        }
        let rel = (f - fn_).abs() / fn_.abs().max(1e-12);
        x = xn;
        f = fn_;
        g = gn;
        log.iterations.push(IterationRecord {
            iteration,
            objective: -f,
            grad_norm: dot(&g, &g).sqrt(),
            step,
        });
        if rel < eta {
            log.converged = true;
            break;
        }
    }
    log.final_objective = -f;
    Ok((x, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;

    fn toy() -> (usize, Vec<EncodedSequence>) {
        use Label::*;
        let data = vec![
            EncodedSequence { features: vec![vec![0, 1], vec![2], vec![3, 0]], labels: Some(vec![B, I, O]) },
            EncodedSequence { features: vec![vec![1], vec![0, 2, 3]], labels: Some(vec![O, B]) },
            EncodedSequence { features: vec![vec![2, 3]], labels: Some(vec![B]) },
        ];
        (4, data)
    }

    fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect()
    }

    #[test]
    fn uniform_single_token() {
        let data = vec![EncodedSequence { features: vec![vec![0]], labels: Some(vec![Label::I]) }];
        let (v, _) = log_likelihood_and_gradient(&[0.0; 12], 1, &data, 1.0).unwrap();
        assert!((v + 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (nf, data) = toy();
        let n = nf * 3 + 9;
        assert_eq!(n, 21);
        let w = pseudo_random(n, 7);
        let (_, g) = log_likelihood_and_gradient(&w, nf, &data, 1.0).unwrap();
        let h = 1e-5;
        for i in 0..n {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[i] += h;
            wm[i] -= h;
            let fp = log_likelihood_and_gradient(&wp, nf, &data, 1.0).unwrap().0;
            let fm = log_likelihood_and_gradient(&wm, nf, &data, 1.0).unwrap().0;
            let fd = (fp - fm) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-6, "slot {i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn huge_c_drops_penalty() {
        let (nf, data) = toy();
        let w = pseudo_random(nf * 3 + 9, 3);
        let (reg, _) = log_likelihood_and_gradient(&w, nf, &data, 1e12).unwrap();
        let (raw, _) = log_likelihood_and_gradient(&w, nf, &data, f64::INFINITY).unwrap();
        assert!((reg - raw).abs() < 1e-12);
    }

    #[test]
    fn mismatches_are_errors() {
        let data = vec![EncodedSequence { features: vec![vec![0]], labels: Some(vec![]) }];
        assert!(log_likelihood_and_gradient(&[0.0; 12], 1, &data, 1.0).is_err());
        let data = vec![EncodedSequence { features: vec![vec![5]], labels: Some(vec![Label::O]) }];
        assert!(log_likelihood_and_gradient(&[0.0; 12], 1, &data, 1.0).is_err());
        assert!(log_likelihood_and_gradient(&[0.0; 11], 1, &data, 1.0).is_err());
    }

    #[test]
    fn objective_never_decreases() {
        let (nf, data) = toy();
        let (_, log) = lbfgs(vec![0.0; nf * 3 + 9], 1e-9, 100, |w| {
            log_likelihood_and_gradient(w, nf, &data, 1.0)
        })
        .unwrap();
        assert!(!log.iterations.is_empty());
        for w in log.iterations.windows(2) {
            assert!(w[1].objective >= w[0].objective);
        }
    }

    #[test]
    fn quadratic_converges() {
        let (x, log) = lbfgs(vec![0.0; 3], 1e-12, 200, |x| {
            let t = [1.0, -2.0, 3.0];
            let v = -x.iter().zip(&t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            let g = x.iter().zip(&t).map(|(a, b)| -2.0 * (a - b)).collect();
            Ok((v, g))
        })
        .unwrap();
        assert!(log.converged);
        for (a, b) in x.iter().zip([1.0, -2.0, 3.0]) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn non_finite_objective_aborts() {
        let r = lbfgs(vec![0.0], 1e-4, 10, |_| Ok((f64::NAN, vec![1.0])));
        assert!(matches!(r, Err(Error::Training(_))));
    }
}
