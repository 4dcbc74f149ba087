//! Fan-out of independent runs (sweeps, bisection seeds, harness members).
//!
//! With the `parallel` feature (default) work is spread over the rayon pool;
//! without it every call runs sequentially with identical results.

use serde::{Deserialize, Serialize};

/// How a batch of independent jobs is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "STEFANPP_THREADS";

/// Map `f` over `items`, preserving order.
pub fn map<T, R, F>(execution: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match execution {
        Execution::Sequential => items.iter().map(f).collect(),
        Execution::Parallel => parallel_map(items, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Size the global pool from `STEFANPP_THREADS` (or `threads` if given).
/// Returns the worker count in effect. Safe to call more than once; only the
/// first call can change the pool.
pub fn configure_threads(threads: Option<usize>) -> usize {
    let requested = threads.or_else(|| {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
    });
    install_pool(requested)
}

#[cfg(feature = "parallel")]
fn install_pool(requested: Option<usize>) -> usize {
    if let Some(n) = requested {
        // An already-initialised pool is not an error for callers.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    rayon::current_num_threads()
}

#[cfg(not(feature = "parallel"))]
fn install_pool(_requested: Option<usize>) -> usize {
    1
}
