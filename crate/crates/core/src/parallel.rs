//! Per-element work distribution.

use rayon::prelude::*;

use crate::error::Result;

/// How element-local work is scheduled.
///
/// `Serial` is the deterministic reference mode. `Threads(n)` runs the
/// element loop on a dedicated rayon pool with `n` workers; results are still
/// collected in element order, so only last-bit rounding inside a worker can
/// differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    #[default]
    Serial,
    Threads(usize),
}

impl Parallelism {
    /// Reads `HHO_THREADS` (0 or unset means serial).
    pub fn from_env() -> Self {
        match std::env::var("HHO_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
            Some(0) | None => Parallelism::Serial,
            Some(n) => Parallelism::Threads(n),
        }
    }

    pub(crate) fn map_indexed<T, F>(&self, n: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        match *self {
            Parallelism::Serial => (0..n).map(f).collect(),
            Parallelism::Threads(threads) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| crate::Error::InvalidArgument(format!("thread pool: {e}")))?;
                pool.install(|| (0..n).into_par_iter().map(f).collect())
            }
        }
    }
}
