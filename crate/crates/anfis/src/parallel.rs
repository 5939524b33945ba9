//! Deterministic data parallelism.
//!
//! Per-sample work is split into fixed chunks whose boundaries depend only on
//! the problem size, never on the number of worker threads. Each chunk is
//! reduced sequentially into a fresh partial, and partials are merged in chunk
//! order. The result is therefore bit-identical whether the chunks run on one
//! thread, on a rayon pool of any width, or with the `parallel` feature
//! disabled entirely.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Default number of samples per chunk.
pub const DEFAULT_CHUNK: usize = 512;

/// Chunk boundaries for `n` items, `size` items per chunk (last may be short).
pub fn chunk_ranges(n: usize, size: usize) -> Vec<Range<usize>> {
    assert!(size > 0);
    let mut out = Vec::with_capacity(n.div_ceil(size));
    let mut start = 0;
    while start < n {
        let end = (start + size).min(n);
        out.push(start..end);
        start = end;
    }
    out
}

/// Compute one partial accumulator per chunk and merge them in chunk order.
///
/// `per_chunk` must derive its result from the chunk range alone; `merge`
/// folds partials left to right starting from `init`.
pub fn chunked_fold<A, P, M>(n: usize, chunk: usize, init: A, per_chunk: P, mut merge: M) -> A
where
    A: Send,
    P: Fn(Range<usize>) -> A + Send + Sync,
    M: FnMut(A, A) -> A,
{
    let ranges = chunk_ranges(n, chunk);

    #[cfg(feature = "parallel")]
    let partials: Vec<A> = ranges.into_par_iter().map(per_chunk).collect();

    #[cfg(not(feature = "parallel"))]
    let partials: Vec<A> = ranges.into_iter().map(per_chunk).collect();

    let mut acc = init;
    for p in partials {
        acc = merge(acc, p);
    }
    acc
}

/// Map each index of `0..n` to a value, preserving order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Run `f` on a dedicated pool of `jobs` threads (1 = run inline).
///
/// Without the `parallel` feature the closure always runs inline.
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    {
        if jobs > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .expect("failed to build thread pool");
            return pool.install(f);
        }
    }
    let _ = jobs;
    f()
}
