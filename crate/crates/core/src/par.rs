//! Data-parallel execution helpers.
//!
//! Batch workloads (box scans, random-state sweeps, run families, long
//! series sums) run through these helpers so the whole crate switches
//! between rayon and plain iterators with the `parallel` feature. Each
//! helper also has an always-sequential twin used by the benchmark suite
//! to compare both paths within a single build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution strategy for a batch workload.
///
/// `Exec::Par` falls back to sequential execution when the crate is
/// built without the `parallel` feature, so callers can request
/// parallelism unconditionally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Seq,
    #[default]
    Par,
}

/// Maps `f` over `0..n` and collects the results in index order.
pub fn map_indexed<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Exec::Seq => map_indexed_seq(n, f),
        #[cfg(feature = "parallel")]
        Exec::Par => (0..n).into_par_iter().map(f).collect(),
        #[cfg(not(feature = "parallel"))]
        Exec::Par => map_indexed_seq(n, f),
    }
}

pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Maximum of `f` over `0..n`. Returns `f64::NEG_INFINITY` for `n == 0`.
pub fn max_indexed<F>(exec: Exec, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    match exec {
        Exec::Seq => max_indexed_seq(n, f),
        #[cfg(feature = "parallel")]
        Exec::Par => (0..n)
            .into_par_iter()
            .map(f)
            .reduce(|| f64::NEG_INFINITY, f64::max),
        #[cfg(not(feature = "parallel"))]
        Exec::Par => max_indexed_seq(n, f),
    }
}

pub fn max_indexed_seq<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64,
{
    (0..n).map(f).fold(f64::NEG_INFINITY, f64::max)
}

/// Sum of `f` over `0..n`.
///
/// The parallel path reduces in deterministic chunk order only up to
/// rayon's join tree, so sums are reproducible for a fixed thread count
/// but may differ from the sequential path in the last few ulps; callers
/// that freeze expected values use `Exec::Seq`.
pub fn sum_indexed<F>(exec: Exec, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    match exec {
        Exec::Seq => sum_indexed_seq(n, f),
        #[cfg(feature = "parallel")]
        Exec::Par => (0..n).into_par_iter().map(f).sum(),
        #[cfg(not(feature = "parallel"))]
        Exec::Par => sum_indexed_seq(n, f),
    }
}

pub fn sum_indexed_seq<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64,
{
    (0..n).map(f).sum()
}
