//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) the helpers dispatch to rayon
//! when asked for [`Execution::Parallel`]. Without the feature every mode runs
//! sequentially, so results never depend on the build configuration: each
//! work item is a pure function of its index and outputs keep index order.

use serde::{Deserialize, Serialize};

/// How a batch of independent work items is executed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    /// True when work will actually be spread over the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_indexed<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Like [`map_indexed`] for fallible work; the first error in index order wins.
pub fn try_map_indexed<T, E, F>(exec: Execution, n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_indexed(exec, n, f).into_iter().collect()
}

/// Fills consecutive chunks of `buf` (chunk `k` covers
/// `k*chunk..(k+1)*chunk`) with `f(k, chunk_slice)`.
pub fn fill_chunks<F>(exec: Execution, buf: &mut [f64], chunk: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    assert!(chunk > 0, "chunk length must be positive");
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        buf.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(k, c)| f(k, c));
        return;
    }
    let _ = exec;
    buf.chunks_mut(chunk).enumerate().for_each(|(k, c)| f(k, c));
}
