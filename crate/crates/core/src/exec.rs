//! Data-parallel helpers. With the `parallel` feature work runs on a rayon
//! pool of the requested size; without it everything runs in order on the
//! calling thread. Results are always returned in input order.

/// Environment variable overriding the configured worker count.
pub const WORKERS_ENV: &str = "STREETSYNTH_WORKERS";

/// Worker count from [`WORKERS_ENV`] if set and valid, else `configured`,
/// else the number of available cores.
pub fn resolve_workers(configured: Option<usize>) -> usize {
    if let Some(n) = std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        return n;
    }
    configured
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Maps `f` over `0..n`.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Runs `f` with `workers` threads available to [`map_indexed`].
#[cfg(feature = "parallel")]
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_workers<R: Send>(_workers: usize, f: impl FnOnce() -> R + Send) -> R {
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved_for_any_pool_size() {
        let expect: Vec<usize> = (0..1000).map(|i| i * i).collect();
        for w in [1, 3, 8] {
            assert_eq!(with_workers(w, || map_indexed(1000, |i| i * i)), expect);
        }
    }
}
