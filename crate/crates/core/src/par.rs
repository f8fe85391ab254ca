//! Deterministic data-parallel helpers.
//!
//! Reductions split the index range into fixed-size chunks and combine the
//! partial sums in chunk order, so results do not depend on the worker count.

use rayon::prelude::*;

const CHUNK: usize = 4096;

/// Sum of `f(i)` for `i in 0..n`, bit-reproducible across thread counts.
pub(crate) fn sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            let mut s = 0.0;
            for i in lo..hi {
                s += f(i);
            }
            s
        })
        .collect();
    partial.iter().sum()
}

/// Maximum of `f(i)` for `i in 0..n` (0 for an empty range).
pub(crate) fn max<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    (0..n).into_par_iter().map(&f).reduce(|| 0.0, f64::max)
}

/// `(0..n).map(f).collect()` evaluated in parallel, order preserved.
pub(crate) fn map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}
