//! Batch execution helpers.
//!
//! Independent evaluations (seed sweeps, evaluation episodes, baseline
//! measurements) go through [`map_indexed`]. With the `parallel` feature the
//! work is spread over the rayon pool, otherwise it runs in order on the
//! calling thread. Results are always returned in index order, so both paths
//! produce identical output.

/// How a batch of independent jobs is executed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Evaluates `f(i)` for `i in 0..n` and collects the results in order.
pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}
