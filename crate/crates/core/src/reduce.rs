//! Deterministic reductions.
//!
//! Every reduction first folds fixed-size leaf chunks sequentially and then
//! combines the leaf results with a fixed-shape pairwise tree, so the result
//! depends only on the input order and never on the number of threads.

use rayon::prelude::*;

/// Leaf size of the pairwise tree.
pub const LEAF: usize = 4096;

/// Pairwise sum of already-reduced partials.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// Deterministic parallel sum of `f(i)` over `0..len`.
pub fn sum_by<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let leaves: Vec<f64> = (0..len.div_ceil(LEAF))
        .into_par_iter()
        .map(|c| {
            let start = c * LEAF;
            let end = (start + LEAF).min(len);
            let mut acc = 0.0;
            for i in start..end {
                acc += f(i);
            }
            acc
        })
        .collect();
    pairwise_sum(&leaves)
}

/// Maximum of `f(i)` over `0..len`; `0.0` for an empty range. NaN propagates.
pub fn max_by<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    (0..len.div_ceil(LEAF))
        .into_par_iter()
        .map(|c| {
            let start = c * LEAF;
            let end = (start + LEAF).min(len);
            let mut acc = 0.0f64;
            for i in start..end {
                acc = nan_max(acc, f(i));
            }
            acc
        })
        .reduce(|| 0.0, nan_max)
}

/// Deterministic parallel fold of `map(i)` over `0..len`.
///
/// Each leaf of [`LEAF`] indices is folded left to right, then leaves are
/// combined pairwise. `combine` must be associative up to rounding for the
/// result to mean anything, but the rounding itself never depends on threads.
pub fn tree_reduce<T, M, C>(len: usize, identity: T, map: M, combine: C) -> T
where
    T: Copy + Send + Sync,
    M: Fn(usize) -> T + Sync,
    C: Fn(T, T) -> T + Sync,
{
    let leaves: Vec<T> = (0..len.div_ceil(LEAF))
        .into_par_iter()
        .map(|c| {
            let start = c * LEAF;
            let end = (start + LEAF).min(len);
            (start..end).fold(identity, |acc, i| combine(acc, map(i)))
        })
        .collect();
    pairwise(&leaves, identity, &combine)
}

/// Pairwise combination of precomputed partials.
pub fn pairwise<T: Copy, C: Fn(T, T) -> T>(values: &[T], identity: T, combine: &C) -> T {
    match values.len() {
        0 => identity,
        1 => values[0],
        n => {
            let mid = n / 2;
            combine(
                pairwise(&values[..mid], identity, combine),
                pairwise(&values[mid..], identity, combine),
            )
        }
    }
}

#[inline]
pub fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_is_independent_of_thread_count() {
        let f = |i: usize| ((i as f64) * 0.37).sin() * 1e-3 + 1.0 / (1.0 + i as f64);
        let n = 100_003;
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| sum_by(n, f));
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| sum_by(n, f));
        assert_eq!(one.to_bits(), four.to_bits());
    }

    #[test]
    fn tree_reduce_matches_pairwise_sum() {
        let f = |i: usize| 1.0 / (1.0 + i as f64);
        let n = 10_000;
        let a = tree_reduce(
            n,
            [0.0, 0.0],
            |i| [f(i), -f(i)],
            |x, y| [x[0] + y[0], x[1] + y[1]],
        );
        assert_eq!(a[0].to_bits(), sum_by(n, f).to_bits());
        assert_eq!(a[1], -a[0]);
    }

    #[test]
    fn max_propagates_nan() {
        assert!(max_by(10, |i| if i == 7 { f64::NAN } else { i as f64 }).is_nan());
        assert_eq!(max_by(10, |i| i as f64), 9.0);
        assert_eq!(max_by(0, |i| i as f64), 0.0);
    }
}
