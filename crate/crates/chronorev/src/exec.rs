//! Execution strategy for the data-parallel inner loops. With the `parallel`
//! feature (default) the indexed maps fan out over rayon; without it they run
//! sequentially. Both paths produce identical output because every work item
//! derives its randomness from its own index, never from thread scheduling.

/// Name of the environment variable capping the worker count.
pub const THREADS_ENV_VAR: &str = "CHRONO_THREADS";

/// Sequential reference implementation of the indexed map.
pub fn map_indexed_seq<T>(n: usize, f: impl Fn(usize) -> T) -> Vec<T> {
    (0..n).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_indexed<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    map_indexed_seq(n, f)
}

/// Dispatches between the two strategies at runtime; the sequential arm is
/// the reference path benchmarks compare against.
pub fn map_indexed_with<T: Send>(
    parallel: bool,
    n: usize,
    f: impl Fn(usize) -> T + Sync + Send,
) -> Vec<T> {
    if parallel {
        map_indexed(n, f)
    } else {
        map_indexed_seq(n, f)
    }
}

/// Order-preserving map over a slice of work items.
#[cfg(feature = "parallel")]
pub fn map_items<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_items<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    items.iter().map(f).collect()
}

/// Applies the `CHRONO_THREADS` cap to the global thread pool. Call once at
/// startup; later calls (or an already-initialized pool) are ignored.
pub fn configure_threads_from_env() {
    #[cfg(feature = "parallel")]
    {
        if let Ok(val) = std::env::var(THREADS_ENV_VAR) {
            if let Ok(n) = val.trim().parse::<usize>() {
                if n > 0 {
                    let _ = rayon::ThreadPoolBuilder::new()
                        .num_threads(n)
                        .build_global();
                }
            }
        }
    }
}
