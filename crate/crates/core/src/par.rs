//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper collects results in index order, so the output does not
//! depend on the execution mode or on the number of worker threads. With the
//! `parallel` feature disabled, [`Execution::Parallel`] silently runs
//! sequentially.

/// How data-parallel loops are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when this mode will actually fan out to a thread pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Evaluates `f(0), …, f(n - 1)` and returns the results in index order.
pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
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

/// Fills consecutive `chunk`-sized pieces of `out`, calling `f(index, piece)`.
pub fn for_each_chunk_mut<F>(out: &mut [f64], chunk: usize, exec: Execution, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    if chunk == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        out.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, piece)| f(i, piece));
        return;
    }
    let _ = exec;
    out.chunks_mut(chunk)
        .enumerate()
        .for_each(|(i, piece)| f(i, piece));
}
