//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) these fan out over rayon's pool;
//! without it they run plain loops, so the crate builds and behaves the
//! same on single-threaded targets. Results are always in index order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n` and collects the results in order.
#[cfg(feature = "parallel")]
pub fn map_indexed<U: Send, F: Fn(usize) -> U + Sync + Send>(n: usize, f: F) -> Vec<U> {
    (0..n).into_par_iter().map(f).collect()
}

/// Maps `f` over `0..n` and collects the results in order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<U, F: Fn(usize) -> U>(n: usize, f: F) -> Vec<U> {
    (0..n).map(f).collect()
}

/// Maps `f` over a slice and collects the results in order.
#[cfg(feature = "parallel")]
pub fn map_slice<T: Sync, U: Send, F: Fn(&T) -> U + Sync + Send>(items: &[T], f: F) -> Vec<U> {
    items.par_iter().map(f).collect()
}

/// Maps `f` over a slice and collects the results in order.
#[cfg(not(feature = "parallel"))]
pub fn map_slice<T, U, F: Fn(&T) -> U>(items: &[T], f: F) -> Vec<U> {
    items.iter().map(f).collect()
}

/// Maximum of `f` over a slice, with empty input mapping to 0.
///
/// Callers use this for suprema of nonnegative quantities, where the
/// supremum over an empty family is 0 by convention.
#[cfg(feature = "parallel")]
pub fn sup_or_zero<T: Sync, F: Fn(&T) -> f64 + Sync + Send>(items: &[T], f: F) -> f64 {
    items.par_iter().map(f).reduce(|| 0.0, f64::max)
}

/// Maximum of `f` over a slice, with empty input mapping to 0.
#[cfg(not(feature = "parallel"))]
pub fn sup_or_zero<T, F: Fn(&T) -> f64>(items: &[T], f: F) -> f64 {
    items.iter().map(f).fold(0.0, f64::max)
}
