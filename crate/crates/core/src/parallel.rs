//! Data-parallel map with a sequential fallback.
//!
//! Results are always collected in input order, so output does not depend
//! on the number of threads.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Map over `0..n`.
#[cfg(feature = "parallel")]
pub fn map_range<R: Send>(n: usize, f: impl Fn(usize) -> R + Sync + Send) -> Vec<R> {
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<R: Send>(n: usize, f: impl Fn(usize) -> R + Sync + Send) -> Vec<R> {
    (0..n).map(f).collect()
}

/// Fallible map; the first error in input order is returned.
pub fn try_map<T: Sync, R: Send, E: Send>(
    items: &[T],
    f: impl Fn(&T) -> Result<R, E> + Sync + Send,
) -> Result<Vec<R>, E> {
    map(items, f).into_iter().collect()
}

/// Size the global pool. Returns false if it was already initialised or
/// the build has no thread pool.
pub fn configure_threads(n: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        false
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn preserves_order() {
        let v: Vec<usize> = (0..1000).collect();
        let out = super::map(&v, |x| x * 2);
        assert!(out.iter().enumerate().all(|(i, y)| *y == 2 * i));
        let r: Result<Vec<usize>, usize> = super::try_map(&v, |&x| if x == 7 || x == 9 { Err(x) } else { Ok(x) });
        assert_eq!(r, Err(7));
    }
}
