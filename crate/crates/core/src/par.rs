//! Data-parallel helpers with a sequential fallback.
//!
//! Audits are pure functions over an immutable complex, so batteries of
//! independent checks map cleanly over worker threads. The `parallel`
//! feature (on by default) routes [`map_collect`] through rayon; without
//! it, or after `init_workers(Some(1))`, everything runs on the calling
//! thread. Results keep input order either way, so reports are identical
//! across both paths.

use std::sync::atomic::{AtomicBool, Ordering};

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Bounds worker parallelism. `Some(1)` forces sequential execution;
/// `Some(n)` with `n ≥ 2` sizes the shared pool (first call wins);
/// `None` keeps the defaults.
pub fn init_workers(n: Option<usize>) {
    match n {
        Some(0) | None => {}
        Some(1) => FORCE_SEQUENTIAL.store(true, Ordering::Relaxed),
        #[allow(unused_variables)]
        Some(n) => {
            FORCE_SEQUENTIAL.store(false, Ordering::Relaxed);
            #[cfg(feature = "parallel")]
            {
                // The global pool can only be built once; later calls keep
                // the existing size.
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

/// True when work must stay on the calling thread.
pub fn sequential_mode() -> bool {
    if cfg!(not(feature = "parallel")) {
        return true;
    }
    FORCE_SEQUENTIAL.load(Ordering::Relaxed)
}

/// Maps `f` over `items`, in parallel when allowed, preserving order.
pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if !sequential_mode() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_keeps_order() {
        let xs: Vec<u32> = (0..1000).collect();
        let ys = map_collect(&xs, |x| x * 2);
        assert_eq!(ys, (0..1000).map(|x| x * 2).collect::<Vec<_>>());
    }
}
