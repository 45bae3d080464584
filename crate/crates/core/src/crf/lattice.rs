use crate::corpus::Label;

/// Per-position label distributions and the log partition function.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MarginalTable {
    pub rows: Vec<[f64; 3]>,
    pub log_z: f64,
}

impl MarginalTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Per-position argmax, ties to the earlier label.
    pub fn argmax_labels(&self) -> Vec<Label> {
        self.rows.iter().map(argmax).collect()
    }
}

pub(crate) fn argmax(row: &[f64; 3]) -> Label {
    let mut best = 0;
    for y in 1..3 {
        if row[y] > row[best] {
            best = y;
        }
    }
    Label::from_index(best)
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Score of one label path: unary terms plus transitions.
pub fn path_score(unary: &[[f64; 3]], trans: &[[f64; 3]; 3], labels: &[Label]) -> f64 {
    let mut s = 0.0;
    for (t, y) in labels.iter().enumerate() {
        s += unary[t][y.index()];
        if t > 0 {
            s += trans[labels[t - 1].index()][y.index()];
        }
    }
    s
}

/// Marginals plus expected transition counts, all computed in log space.
pub fn forward_backward(unary: &[[f64; 3]], trans: &[[f64; 3]; 3]) -> (MarginalTable, [[f64; 3]; 3]) {
    let n = unary.len();
    let mut pair = [[0.0; 3]; 3];
    if n == 0 {
        return (MarginalTable::default(), pair);
    }
    let mut alpha = vec![[0.0; 3]; n];
    let mut beta = vec![[0.0; 3]; n];
    alpha[0] = unary[0];
    for t in 1..n {
        for j in 0..3 {
            let prev = [
                alpha[t - 1][0] + trans[0][j],
                alpha[t - 1][1] + trans[1][j],
                alpha[t - 1][2] + trans[2][j],
            ];
            alpha[t][j] = unary[t][j] + log_sum_exp(&prev);
        }
    }
    for t in (0..n - 1).rev() {
        for i in 0..3 {
            let next = [
                trans[i][0] + unary[t + 1][0] + beta[t + 1][0],
                trans[i][1] + unary[t + 1][1] + beta[t + 1][1],
                trans[i][2] + unary[t + 1][2] + beta[t + 1][2],
            ];
            beta[t][i] = log_sum_exp(&next);
        }
    }
    let log_z = log_sum_exp(&alpha[n - 1]);
    let rows = (0..n)
        .map(|t| {
            let mut r = [0.0; 3];
            for y in 0..3 {
                r[y] = (alpha[t][y] + beta[t][y] - log_z).exp();
            }
            let s: f64 = r.iter().sum();
            r.map(|p| p / s)
        })
        .collect();
    for t in 1..n {
        for i in 0..3 {
            for j in 0..3 {
                pair[i][j] += (alpha[t - 1][i] + trans[i][j] + unary[t][j] + beta[t][j] - log_z).exp();
            }
        }
    }
    (MarginalTable { rows, log_z }, pair)
}

/// Best label path; ties resolve toward the earlier label index.
pub fn viterbi(unary: &[[f64; 3]], trans: &[[f64; 3]; 3]) -> Vec<Label> {
    let n = unary.len();
    if n == 0 {
        return Vec::new();
    }
    let mut delta = vec![[0.0; 3]; n];
    let mut back = vec![[0usize; 3]; n];
    delta[0] = unary[0];
    for t in 1..n {
        for j in 0..3 {
            let mut best = 0;
            let mut best_score = delta[t - 1][0] + trans[0][j];
            for i in 1..3 {
                let s = delta[t - 1][i] + trans[i][j];
                if s > best_score {
                    best = i;
                    best_score = s;
                }
            }
            delta[t][j] = best_score + unary[t][j];
            back[t][j] = best;
        }
    }
    let mut y = argmax(&delta[n - 1]).index();
    let mut out = vec![Label::from_index(y); n];
    for t in (1..n).rev() {
        y = back[t][y];
        out[t - 1] = Label::from_index(y);
    }
    out
}
