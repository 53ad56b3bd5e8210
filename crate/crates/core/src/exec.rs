//! Deterministic execution helpers shared by the data-parallel inner loops.
//!
//! Work is split into fixed-size chunks; each chunk is evaluated
//! sequentially and chunk results are combined in index order. With the
//! `parallel` feature the chunks run on rayon, without it they run in a
//! plain loop — the combination order is identical either way, so outputs
//! are bit-stable across feature flags and worker counts.

/// Fixed chunk length for index-range splits. Not tied to thread count.
pub(crate) const CHUNK: u64 = 4096;

fn chunk_bounds(n: u64) -> impl Iterator<Item = (u64, u64)> {
    (0..n.div_ceil(CHUNK)).map(move |c| (c * CHUNK, ((c + 1) * CHUNK).min(n)))
}

/// Maps each chunk to a value, returning chunk results in index order.
pub(crate) fn map_chunks<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, u64) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        chunk_bounds(n)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(lo, hi)| f(lo, hi))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        chunk_bounds(n).map(|(lo, hi)| f(lo, hi)).collect()
    }
}

/// Sequential twin of [`map_chunks`], kept available for benchmarks.
pub(crate) fn map_chunks_seq<T, F>(n: u64, f: F) -> Vec<T>
where
    F: Fn(u64, u64) -> T,
{
    chunk_bounds(n).map(|(lo, hi)| f(lo, hi)).collect()
}

/// Counts indices in `0..n` satisfying the predicate.
pub(crate) fn count_matching<F>(n: u64, pred: F) -> u64
where
    F: Fn(u64) -> bool + Sync,
{
    map_chunks(n, |lo, hi| (lo..hi).filter(|&i| pred(i)).count() as u64)
        .into_iter()
        .sum()
}

pub(crate) fn count_matching_seq<F>(n: u64, pred: F) -> u64
where
    F: Fn(u64) -> bool,
{
    map_chunks_seq(n, |lo, hi| (lo..hi).filter(|&i| pred(i)).count() as u64)
        .into_iter()
        .sum()
}

/// Kahan-compensated sum of an iterator, in its given order.
fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Sums f(i) over 0..n: compensated within chunks, chunk partials combined
/// in index order, so the float result does not depend on scheduling.
pub(crate) fn sum_ordered<F>(n: u64, f: F) -> f64
where
    F: Fn(u64) -> f64 + Sync,
{
    kahan_sum(map_chunks(n, |lo, hi| kahan_sum((lo..hi).map(&f))).into_iter())
}

pub(crate) fn sum_ordered_seq<F>(n: u64, f: F) -> f64
where
    F: Fn(u64) -> f64,
{
    kahan_sum(map_chunks_seq(n, |lo, hi| kahan_sum((lo..hi).map(&f))).into_iter())
}

/// Collects f(i) for i in 0..n preserving index order.
pub(crate) fn collect_indexed<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    let chunks = map_chunks(n, |lo, hi| (lo..hi).map(&f).collect::<Vec<T>>());
    let mut out = Vec::with_capacity(n as usize);
    for c in chunks {
        out.extend(c);
    }
    out
}
