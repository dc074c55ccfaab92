//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper preserves input order in its output, so results never depend
//! on whether the `parallel` feature is compiled in or on the thread count.

use std::ops::Range;

/// Whether the crate was built with rayon support.
pub const fn parallel_available() -> bool {
    cfg!(feature = "parallel")
}

/// `range.map(f).collect()`, on the rayon pool when `parallel` is set.
pub fn map_range<T, F>(range: Range<usize>, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return range.into_par_iter().map(f).collect();
    }
    let _ = parallel;
    range.map(f).collect()
}

/// `items.iter().map(f).collect()`, on the rayon pool when `parallel` is set.
pub fn map_slice<S, T, F>(items: &[S], parallel: bool, f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}
