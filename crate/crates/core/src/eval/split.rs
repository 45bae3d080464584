use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Fisher–Yates over `0..n` driven by SplitMix64 seeded with `seed`:
/// for `i` from `n-1` down to 1, swap `i` with `next_u64() % (i + 1)`.
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut p: Vec<usize> = (0..n).collect();
    shuffle_with(&mut p, &mut rng);
    p
}

fn shuffle_with<T>(items: &mut [T], rng: &mut SplitMix64) {
    for i in (1..items.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        items.swap(i, j);
    }
}

/// Shuffles, then puts the first `ceil(fraction * n)` items in the first part.
pub fn shuffle_and_split<T: Clone>(items: &[T], seed: u64, fraction: f64) -> Result<(Vec<T>, Vec<T>)> {
    if items.is_empty() {
        return Err(Error::InvalidInput("cannot split an empty corpus".into()));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidInput(format!("split fraction {fraction} outside (0, 1)")));
    }
    let n = items.len();
    let cut = ((fraction * n as f64) - 1e-9).ceil() as usize;
    let order = permutation(n, seed);
    let a = order[..cut].iter().map(|&i| items[i].clone()).collect();
    let b = order[cut..].iter().map(|&i| items[i].clone()).collect();
    Ok((a, b))
}

/// Item indices per `[repeat][fold]`. One generator seeded with `seed`
/// reshuffles `0..n` for every repeat; the first `n % k` folds get one extra item.
pub fn fold_assignment(n: usize, k: usize, repeats: usize, seed: u64) -> Result<Vec<Vec<Vec<usize>>>> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 folds, got {k}")));
    }
    if k > n {
        return Err(Error::InvalidInput(format!("{k} folds requested for {n} sentences")));
    }
    let mut rng = SplitMix64::seed_from_u64(seed);
    Ok((0..repeats)
        .map(|_| {
            let mut order: Vec<usize> = (0..n).collect();
            shuffle_with(&mut order, &mut rng);
            let (base, extra) = (n / k, n % k);
            let mut start = 0;
            (0..k)
                .map(|f| {
                    let len = base + usize::from(f < extra);
                    let fold = order[start..start + len].to_vec();
                    start += len;
                    fold
                })
                .collect()
        })
        .collect())
}

/// Result of one train/test round.
#[derive(Clone, Debug, PartialEq)]
pub struct FoldResult<R> {
    pub repeat: usize,
    pub fold: usize,
    pub result: R,
}

/// Runs `run(train, test)` for every fold of every repeat in parallel.
/// Results come back ordered by `(repeat, fold)`.
pub fn cross_validate<T, R, F>(items: &[T], k: usize, repeats: usize, seed: u64, run: F) -> Result<Vec<FoldResult<R>>>
where
    T: Sync,
    R: Send,
    F: Fn(&[&T], &[&T]) -> Result<R> + Sync,
{
    let folds = fold_assignment(items.len(), k, repeats, seed)?;
    let jobs: Vec<(usize, usize)> = (0..repeats).flat_map(|r| (0..k).map(move |f| (r, f))).collect();
    jobs.par_iter()
        .map(|&(r, f)| {
            let test: Vec<&T> = folds[r][f].iter().map(|&i| &items[i]).collect();
            let train: Vec<&T> = folds[r]
                .iter()
                .enumerate()
                .filter(|&(g, _)| g != f)
                .flat_map(|(_, idx)| idx.iter().map(|&i| &items[i]))
                .collect();
            run(&train, &test).map(|result| FoldResult { repeat: r, fold: f, result })
        })
        .collect()
}
