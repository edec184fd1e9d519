//! Execution strategy for the data-parallel sweeps.
//!
//! With the `parallel` feature (on by default) [`Execution::Parallel`] fans
//! work out over the rayon thread pool. Without it every strategy runs
//! sequentially, so callers never need to branch on the feature themselves.
//! Results always come back in input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this strategy really runs on more than one thread.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Maps `f` over `items`, keeping the input order.
    pub fn map<T, R, F>(self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            return items.into_par_iter().map(f).collect();
        }
        items.into_iter().map(f).collect()
    }

    /// Maps `f` over `0..n`.
    pub fn map_range<R, F>(self, n: u64, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(u64) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Maximum of `f` over `0..n` (NaN-free inputs assumed); `0.0` when empty.
    pub fn max_over<F>(self, n: u64, f: F) -> f64
    where
        F: Fn(u64) -> f64 + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            return (0..n).into_par_iter().map(f).reduce(|| 0.0, f64::max);
        }
        (0..n).map(f).fold(0.0, f64::max)
    }
}

/// Sizes the global thread pool. Returns `false` when the pool was already
/// initialised (or when built without the `parallel` feature).
pub fn configure_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        false
    }
}
