//! Bounded data parallelism for embarrassingly parallel grids.
//!
//! The thread count is capped by the `BCFKIT_THREADS` environment
//! variable (default: available parallelism).  Results are written by
//! index, so output order is deterministic regardless of scheduling.

use std::num::NonZeroUsize;

/// Effective worker count.
pub fn thread_count() -> usize {
    if let Ok(v) = std::env::var("BCFKIT_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            return n.max(1);
        }
    }
    std::thread::available_parallelism().map(NonZeroUsize::get).unwrap_or(1)
}

/// Map `f` over `0..n` in parallel, preserving index order.
pub fn par_map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = thread_count().min(n.max(1));
    if workers <= 1 || n < 2 {
        return (0..n).map(f).collect();
    }
    let mut out: Vec<Option<T>> = (0..n).map(|_| None).collect();
    let chunk = n.div_ceil(workers);
    std::thread::scope(|scope| {
        for (w, slice) in out.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                for (i, slot) in slice.iter_mut().enumerate() {
                    *slot = Some(f(w * chunk + i));
                }
            });
        }
    });
    out.into_iter().map(|v| v.expect("all slots filled")).collect()
}
