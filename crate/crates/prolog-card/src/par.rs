//! Data-parallel map with a sequential fallback.

/// Maps `f` over `items`, keeping order. Each worker gets its own state
/// from `init`. Runs on the rayon pool when `parallel` is requested and
/// the `parallel` feature is enabled.
pub fn map_with<T, S, R, I, F>(items: &[T], parallel: bool, init: I, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return items.par_iter().map_init(&init, |s, t| f(s, t)).collect();
    }
    let _ = parallel;
    let mut s = init();
    items.iter().map(|t| f(&mut s, t)).collect()
}

/// Whether `map_with(.., true, ..)` actually runs in parallel.
pub const fn available() -> bool {
    cfg!(feature = "parallel")
}
