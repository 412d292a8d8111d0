//! Execution helpers shared by the harness and the per-vertex loops.
//!
//! `workers` follows one convention everywhere: `1` runs sequentially, `0`
//! uses the global rayon pool and `k > 1` uses a dedicated pool with `k`
//! threads. Without the `parallel` feature every value runs sequentially.

/// Whether the crate was built with rayon support.
pub const PARALLEL_ENABLED: bool = cfg!(feature = "parallel");

/// Maps `f` over `0..len` and collects the results in index order.
pub fn map_indexed<T, F>(len: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if workers != 1 {
        use rayon::prelude::*;
        let run = || (0..len).into_par_iter().map(&f).collect::<Vec<T>>();
        if workers == 0 {
            return run();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => return pool.install(run),
            // fall through to the sequential path if the pool cannot be built
            Err(_) => {}
        }
    }
    let _ = workers;
    (0..len).map(f).collect()
}
