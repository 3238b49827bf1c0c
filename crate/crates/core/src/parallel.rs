//! Deterministic chunked parallelism.
//!
//! Work items `0..n` are cut into fixed-size chunks independent of the worker
//! count. Each chunk is processed sequentially and chunk results come back in
//! chunk order, so any reduction the caller performs afterwards is bitwise
//! reproducible for 1, 2 or 64 workers.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{invalid, Result};

pub const CHUNK_SIZE: usize = 1024;

pub fn run_chunked<T, F>(n: usize, threads: Option<usize>, work: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Range<usize>) -> Result<T> + Sync + Send,
{
    let n_chunks = n.div_ceil(CHUNK_SIZE);
    let job = || {
        (0..n_chunks)
            .into_par_iter()
            .map(|c| work(c * CHUNK_SIZE..((c + 1) * CHUNK_SIZE).min(n)))
            .collect::<Result<Vec<T>>>()
    };
    with_threads(threads, job)
}

/// Maps `work` over `0..n` in parallel; results come back in index order.
pub fn run_indexed<T, F>(n: usize, threads: Option<usize>, work: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    with_threads(threads, || (0..n).into_par_iter().map(&work).collect::<Result<Vec<T>>>())
}

/// Runs `job` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<R: Send>(threads: Option<usize>, job: impl FnOnce() -> Result<R> + Send) -> Result<R> {
    match threads {
        None => job(),
        Some(0) => Err(invalid("threads", "must be at least 1")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| invalid("threads", e.to_string()))?
            .install(job),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunk_order_is_preserved() {
        for threads in [Some(1), Some(3), None] {
            let parts = run_chunked(5000, threads, |r| Ok(r.collect::<Vec<_>>())).unwrap();
            let flat: Vec<usize> = parts.into_iter().flatten().collect();
            assert_eq!(flat, (0..5000).collect::<Vec<_>>());
        }
    }

    #[test]
    fn zero_threads_rejected() {
        assert!(run_chunked(10, Some(0), |_| Ok(())).is_err());
    }
}
