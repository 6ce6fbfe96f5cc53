//! Order-preserving data-parallel maps.
//!
//! With the `parallel` feature (default) these fan out over rayon's pool when
//! asked to; without it, or with `parallel = false`, they run on the calling
//! thread. Output order always matches input order, so callers that reduce
//! the results stay deterministic either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// True when this build can run work in parallel.
pub const fn available() -> bool {
    cfg!(feature = "parallel")
}

pub fn map<T, R, F>(items: &[T], parallel: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

pub fn map_range<R, F>(n: usize, parallel: bool, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = parallel;
    (0..n).map(f).collect()
}

/// Runs `f` on a dedicated pool of `workers` threads (`None` keeps the
/// global pool). A no-op wrapper in sequential builds.
pub fn with_workers<R, F>(workers: Option<usize>, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    if let Some(n) = workers {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            return pool.install(f);
        }
        log::warn!("could not build a {n}-thread pool; using the global pool");
    }
    let _ = workers;
    f()
}
