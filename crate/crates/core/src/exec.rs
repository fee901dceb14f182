//! Execution strategy for independent, order-preserving batch work.
//!
//! Every batch in this crate (experiment replicates, Monte Carlo trials) is a
//! map over independent items whose results are collected in input order, so
//! the output never depends on scheduling. With the `parallel` feature the
//! map runs on a dedicated rayon pool; without it, [`Execution::Parallel`]
//! degrades to the sequential loop.

/// How a batch map is executed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    #[default]
    Sequential,
    /// Run on a pool of this many worker threads.
    Parallel(usize),
}

impl Execution {
    /// `workers <= 1` means sequential.
    pub fn with_workers(workers: usize) -> Self {
        if workers <= 1 {
            Execution::Sequential
        } else {
            Execution::Parallel(workers)
        }
    }

    pub fn workers(self) -> usize {
        match self {
            Execution::Sequential => 1,
            Execution::Parallel(n) => n.max(1),
        }
    }

    /// Maps `f` over `items`, returning results in input order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().map(f).collect(),
            Execution::Parallel(workers) => parallel_map(workers, items, f),
        }
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, R, F>(workers: usize, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;

    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        // The pool could not start its threads; run on the caller.
        Err(_) => items.iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, R, F>(_workers: usize, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}
