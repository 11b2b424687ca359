use crate::error::{Error, Result};

/// Run `f` for every path index and collect results in index order.
///
/// With the `parallel` feature this fans out over the current rayon pool;
/// output order never depends on scheduling.
pub(crate) fn map_paths<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let wrap = |i: usize| {
        f(i).map_err(|e| Error::Path {
            index: i,
            source: Box::new(e),
        })
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(wrap).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(wrap).collect()
    }
}

/// Like [`map_paths`] for independent grid points; errors pass through
/// unchanged.
pub(crate) fn map_grid<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
