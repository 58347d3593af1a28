//! Data-parallel scan helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) these run on rayon; without it
//! they degrade to plain iterators. Both paths aggregate in index order,
//! so callers see identical results either way: `find_first_in` returns
//! the *lowest* matching index, `map_indices` preserves order, and `all`
//! is order-independent.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Lowest `i < count` with `pred(i)`, or `None`.
pub fn find_first_in<P>(count: usize, pred: P) -> Option<usize>
where
    P: Fn(usize) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..count).into_par_iter().find_first(|&i| pred(i))
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).find(|&i| pred(i))
    }
}

/// `pred(i)` for every `i < count`.
pub fn all<P>(count: usize, pred: P) -> bool
where
    P: Fn(usize) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..count).into_par_iter().all(pred)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).all(pred)
    }
}

/// `f(0), f(1), ..., f(count-1)` in index order.
pub fn map_indices<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

/// True when compiled with the rayon backend.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn find_first_returns_lowest_match() {
        assert_eq!(find_first_in(1000, |i| i % 37 == 5 && i > 100), Some(116));
        assert_eq!(find_first_in(10, |_| false), None);
    }

    #[test]
    fn map_preserves_order() {
        assert_eq!(map_indices(5, |i| i * i), vec![0, 1, 4, 9, 16]);
    }

    #[test]
    fn all_matches_sequential_semantics() {
        assert!(all(100, |i| i < 100));
        assert!(!all(100, |i| i != 50));
    }
}
