//! Data-parallel helpers. With the `parallel` feature these dispatch to
//! rayon; without it they run sequentially. Results are always returned in
//! input order so parallel and sequential runs produce identical output.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many cells assembly stays on the calling thread.
pub const ASSEMBLY_CHUNK: usize = 512;

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

/// Apply `f` to every item, keeping input order.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Force sequential execution regardless of the feature flag.
pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Split `0..len` into contiguous chunks and run `f` on each, returning the
/// per-chunk results in order.
pub fn chunks<R, F>(len: usize, chunk: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(Range<usize>) -> R + Sync + Send,
{
    let chunk = chunk.max(1);
    let ranges: Vec<Range<usize>> = (0..len)
        .step_by(chunk)
        .map(|s| s..(s + chunk).min(len))
        .collect();
    map(&ranges, |r| f(r.clone()))
}

/// Run `f` inside a pool of `jobs` threads (ignored without `parallel`).
pub fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = jobs {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
            {
                return pool.install(f);
            }
        }
        f()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
        f()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_range_in_order() {
        let parts = chunks(10, 3, |r| r.collect::<Vec<_>>());
        assert_eq!(parts.concat(), (0..10).collect::<Vec<_>>());
        assert_eq!(parts.len(), 4);
        assert!(chunks(0, 3, |r| r.len()).is_empty());
    }

    #[test]
    fn map_matches_sequential() {
        let xs: Vec<u64> = (0..100).collect();
        assert_eq!(map(&xs, |x| x * x), map_sequential(&xs, |x| x * x));
        assert_eq!(with_jobs(Some(2), || 7), 7);
    }
}
