//! Thin switch between rayon and plain iterators.
//!
//! With the `parallel` feature (default) the helpers fan out over the rayon
//! pool; without it they run the same closures sequentially. Reductions are
//! order-preserving in both modes, so results do not depend on scheduling.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps every index of `range` and folds the results left to right with `combine`.
pub fn map_reduce<T, M, C>(range: Range<usize>, identity: impl Fn() -> T + Sync + Send, map: M, combine: C) -> T
where
    T: Send,
    M: Fn(usize) -> T + Sync + Send,
    C: Fn(T, T) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        range.into_par_iter().map(map).reduce(identity, combine)
    }
    #[cfg(not(feature = "parallel"))]
    {
        range.map(map).fold(identity(), combine)
    }
}

pub fn map_collect<T, M>(range: Range<usize>, map: M) -> Vec<T>
where
    T: Send,
    M: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        range.into_par_iter().map(map).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        range.map(map).collect()
    }
}

/// Runs `f` on consecutive chunks of `data`, passing the chunk index.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
    }
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
