//! Evaluating independent grid points, in parallel when the `parallel`
//! feature is on. Results always come back in input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f` to every point, preserving order.
#[cfg(feature = "parallel")]
pub fn map_grid<T, R, F>(points: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    points.par_iter().map(f).collect()
}

/// Applies `f` to every point, preserving order.
#[cfg(not(feature = "parallel"))]
pub fn map_grid<T, R, F>(points: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    map_grid_serial(points, f)
}

/// Single-threaded reference for [`map_grid`].
pub fn map_grid_serial<T, R, F>(points: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    points.iter().map(f).collect()
}

/// `n` points from `lo` to `hi` inclusive, linearly or geometrically spaced.
pub fn spaced(lo: f64, hi: f64, n: usize, log: bool) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| {
            let u = k as f64 / (n - 1) as f64;
            if k == n - 1 {
                hi
            } else if log {
                lo * (hi / lo).powf(u)
            } else {
                lo + (hi - lo) * u
            }
        })
        .collect()
}
