//! Data-parallel helpers. With the `parallel` feature these fan out over rayon,
//! otherwise they run sequentially. Callers always get results in index order.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

/// Number of fixed work lanes used by Monte Carlo loops. Results depend on the
/// lane count, never on the thread count.
pub const LANES: usize = 32;

/// Maps `0..len` through `f` and collects in index order.
pub fn map_indexed<T, F>(exec: Exec, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Exec::Parallel {
        use rayon::prelude::*;
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

/// Maps a slice through `f` and collects in order.
pub fn map_slice<A, T, F>(exec: Exec, items: &[A], f: F) -> Vec<T>
where
    A: Sync,
    T: Send,
    F: Fn(&A) -> T + Sync + Send,
{
    map_indexed(exec, items.len(), |i| f(&items[i]))
}

/// Applies `f` to every element in place.
pub fn for_each_mut<A, F>(exec: Exec, items: &mut [A], f: F)
where
    A: Send,
    F: Fn(usize, &mut A) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Exec::Parallel {
        use rayon::prelude::*;
        items.par_iter_mut().enumerate().for_each(|(i, a)| f(i, a));
        return;
    }
    let _ = exec;
    items.iter_mut().enumerate().for_each(|(i, a)| f(i, a));
}

/// Splits `total` work items into `LANES` contiguous ranges.
pub fn lane_ranges(total: usize) -> Vec<std::ops::Range<usize>> {
    let lanes = LANES.min(total.max(1));
    let base = total / lanes;
    let extra = total % lanes;
    let mut out = Vec::with_capacity(lanes);
    let mut start = 0;
    for i in 0..lanes {
        let len = base + usize::from(i < extra);
        out.push(start..start + len);
        start += len;
    }
    out
}
