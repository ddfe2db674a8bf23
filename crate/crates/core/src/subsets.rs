//! Index-set enumeration with explicit combinatorial budgets.

use itertools::Itertools;

use crate::error::{Error, Result};

/// Default cap on the number of subsets a single scan may visit.
pub const DEFAULT_SUBSET_CAP: u128 = 1_000_000;

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

pub fn check_budget(needed: u128, cap: u128) -> Result<()> {
    if needed > cap {
        Err(Error::Budget { needed, cap })
    } else {
        Ok(())
    }
}

/// All k-subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..n).combinations(k)
}

/// Sorted complement of `set` in `0..n`. `set` must be sorted.
pub fn complement(set: &[usize], n: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(n.saturating_sub(set.len()));
    let mut it = set.iter().peekable();
    for i in 0..n {
        if it.peek() == Some(&&i) {
            it.next();
        } else {
            out.push(i);
        }
    }
    out
}

/// Maximum of `score` over all k-subsets of `0..n`, scanning lexicographically.
///
/// A later subset replaces the incumbent only when it beats it by more than a
/// relative 1e-12, so near-ties resolve to the lexicographically first subset.
pub fn max_over_subsets(
    n: usize,
    k: usize,
    cap: u128,
    mut score: impl FnMut(&[usize]) -> Result<f64>,
) -> Result<(f64, Vec<usize>)> {
    check_budget(binomial(n, k), cap)?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for subset in k_subsets(n, k) {
        let v = score(&subset)?;
        let better = match &best {
            None => true,
            Some((b, _)) => v > b + 1e-12 * b.abs().max(1.0),
        };
        if better {
            best = Some((v, subset));
        }
    }
    best.ok_or_else(|| Error::InvalidArgument(format!("no {k}-subsets of {n} indices")))
}
