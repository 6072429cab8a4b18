//! Order-preserving data-parallel maps.
//!
//! With the `parallel` feature the maps fan out over rayon; without it they run
//! sequentially. Output order always equals input order and every element is
//! computed independently, so results are bit-identical across thread counts.

/// Below this many items the sequential path is used even when `parallel` is on.
const MIN_PARALLEL_LEN: usize = 256;

#[cfg(feature = "parallel")]
pub(crate) fn map_range<U, F>(len: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    if len < MIN_PARALLEL_LEN {
        (0..len).map(f).collect()
    } else {
        (0..len).into_par_iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_range<U, F>(len: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    let _ = MIN_PARALLEL_LEN;
    (0..len).map(f).collect()
}

/// Coarse-grained map for independent jobs (experiment replicates); no length cutoff.
#[cfg(feature = "parallel")]
pub(crate) fn map_jobs<T, U, F>(jobs: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    jobs.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_jobs<T, U, F>(jobs: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    jobs.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_order() {
        let out = map_range(1000, |i| i * 2);
        assert!(out.iter().enumerate().all(|(i, &v)| v == 2 * i));
        let jobs: Vec<u32> = (0..50).collect();
        assert_eq!(map_jobs(&jobs, |j| j + 1), (1..51).collect::<Vec<_>>());
    }
}
