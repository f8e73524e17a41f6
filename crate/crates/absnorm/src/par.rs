//! Thin wrapper around the optional thread pool. Every scan in the crate goes
//! through `map_reduce`, so turning the `parallel` feature off (the wasm
//! build) only changes throughput, never results: the reduction operators used
//! are associative and commutative, with index tie-breaks where an argmin or
//! argmax escapes the scan.

#[cfg(feature = "parallel")]
pub(crate) fn map_reduce<T, M, R>(n: usize, identity: T, map: M, reduce: R) -> T
where
    T: Send + Sync + Clone,
    M: Fn(usize) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    use rayon::prelude::*;
    // Small floor only: callers range from millions of cheap items to a few
    // thousand heavy blocks, and a large floor would serialise the latter.
    (0..n)
        .into_par_iter()
        .with_min_len(64)
        .map(map)
        .reduce(|| identity.clone(), reduce)
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_reduce<T, M, R>(n: usize, identity: T, map: M, reduce: R) -> T
where
    T: Send + Sync + Clone,
    M: Fn(usize) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    (0..n).map(map).fold(identity, reduce)
}

/// Lexicographic min of (value, index): deterministic argmin under any
/// reduction order.
pub(crate) fn min_arg(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    if (b.0, b.1) < (a.0, a.1) {
        b
    } else {
        a
    }
}

/// Lexicographic max of (value, index), preferring the smaller index on ties.
pub(crate) fn max_arg(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}
