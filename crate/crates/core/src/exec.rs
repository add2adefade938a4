//! Execution strategy for data-parallel sweeps.
//!
//! Every helper preserves input order in its output, so results are
//! identical between the sequential and the parallel path.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How a sweep is executed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Falls back to sequential execution without the `parallel` feature.
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

impl Exec {
    /// Maps `f` over `0..n`, returning results in index order.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Maps `f` over a slice, returning results in slice order.
    pub fn map_slice<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// Index and value of the maximum of `f` over `0..n`. Ties resolve to
    /// the lowest index; NaN values are skipped.
    pub fn argmax_range<F>(self, n: usize, f: F) -> Option<(usize, f64)>
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let values = self.map_range(n, f);
        argmax(&values)
    }

    /// Sorts in place; unstable order for equal elements is irrelevant for
    /// the integer keys this is used with.
    pub fn sort_unstable<T: Ord + Send>(self, items: &mut [T]) {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_sort_unstable(),
            _ => items.sort_unstable(),
        }
    }
}

pub(crate) fn argmax(values: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((i, v)),
        }
    }
    best
}
