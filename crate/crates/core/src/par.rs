//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) batch loops run on the rayon
//! pool; without it they run in order on the calling thread. Results are
//! always returned in index order, so output is identical either way.

/// Maps `f` over `0..len` sequentially.
pub fn map_indices_seq<T, F>(len: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..len).map(f).collect()
}

/// Maps `f` over `0..len` on the rayon pool.
#[cfg(feature = "parallel")]
pub fn map_indices_par<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

/// Maps `f` over `0..len`, in parallel when the feature is enabled.
pub fn map_indices<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_indices_par(len, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_indices_seq(len, f)
    }
}

/// Maps `f` over a slice, preserving order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_indices(items.len(), |i| f(&items[i]))
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let v = map_indices(100, |i| i * i);
        assert_eq!(v, map_indices_seq(100, |i| i * i));
        assert_eq!(v[9], 81);
    }
}
