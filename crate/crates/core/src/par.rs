//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) [`Exec::Parallel`] runs on rayon;
//! without it every call runs sequentially.

/// How to execute an embarrassingly parallel loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    #[default]
    Parallel,
    Sequential,
}

impl Exec {
    /// `Parallel` only when built with the `parallel` feature.
    pub fn effective(self) -> Exec {
        if cfg!(feature = "parallel") {
            self
        } else {
            Exec::Sequential
        }
    }
}

/// `items.iter().map(f)` preserving order.
pub fn map<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec.effective() {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Run `op` with at most `workers` threads for nested [`map`] calls.
/// `workers == 0` keeps the global pool.
pub fn with_workers<R: Send>(workers: usize, op: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if workers > 0 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            return pool.install(op);
        }
    }
    let _ = workers;
    op()
}
