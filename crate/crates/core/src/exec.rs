//! Batch execution over independent work items.
//!
//! Every data-parallel loop in the crate (per-sample gradients, sampling
//! runs, evaluation windows, sweeps) goes through [`map_indexed`]. Results
//! are always returned in input order and each item carries its own index,
//! so callers derive per-item RNG streams from it and get identical output
//! regardless of thread count. Without the `parallel` feature every mode
//! runs sequentially.

/// How a batch of independent items is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

impl ExecMode {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

/// Applies `f(index, item)` to every item, returning results in order.
pub fn map_indexed<T, R, F>(mode: ExecMode, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect();
    }
    let _ = mode;
    items.iter().enumerate().map(|(i, x)| f(i, x)).collect()
}

/// `map_indexed` over `0..n`.
pub fn map_range<R, F>(mode: ExecMode, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..n).map(f).collect()
}

/// Caps the global rayon pool. A no-op without the `parallel` feature or
/// when the pool is already initialised.
pub fn init_threads(threads: usize) {
    #[cfg(feature = "parallel")]
    if threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let _ = threads;
}
