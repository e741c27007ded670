//! Data-parallel grid evaluation.
//!
//! Grid points are independent work items; results are always
//! collected by index, so the output is identical for any thread count
//! and for the sequential fallback build (`--no-default-features`).

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f` to every index in `0..count`, in parallel when the
/// `parallel` feature is enabled.
pub fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

/// Sequential reference version of [`map_indexed`], available in every
/// build for benchmarking against the parallel path.
pub fn map_indexed_seq<T, F>(count: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..count).map(f).collect()
}

/// Runs `op` inside a thread pool of the requested size.
///
/// `None` uses the default pool (all cores). Without the `parallel`
/// feature the request is ignored and `op` runs on the calling thread.
pub fn run_with_threads<R, F>(threads: Option<usize>, op: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        match threads {
            Some(count) if count > 0 => rayon::ThreadPoolBuilder::new()
                .num_threads(count)
                .build()
                .expect("thread pool construction cannot fail with a positive count")
                .install(op),
            _ => op(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        op()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let f = |i: usize| (i as f64).sqrt() * 3.0 + 1.0;
        assert_eq!(map_indexed(1000, f), map_indexed_seq(1000, f));
    }

    #[test]
    fn thread_pool_sizes_do_not_change_results() {
        let f = |i: usize| (i * i) as u64;
        let one = run_with_threads(Some(1), || map_indexed(500, f));
        let many = run_with_threads(Some(8), || map_indexed(500, f));
        assert_eq!(one, many);
    }
}
