//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper produces bitwise-identical results under both policies:
//! maps are order-preserving and reductions are computed over fixed-size
//! chunks whose partial results are summed sequentially. When the crate is
//! built without the `parallel` feature, [`ExecPolicy::Parallel`] silently
//! runs sequentially.

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length for deterministic reductions.
const REDUCE_CHUNK: usize = 1024;

/// Work below this many items is never dispatched to the thread pool.
const MIN_PARALLEL_LEN: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExecPolicy {
    Sequential,
    #[default]
    Parallel,
}

impl ExecPolicy {
    #[inline]
    fn use_threads(self, len: usize) -> bool {
        cfg!(feature = "parallel") && self == ExecPolicy::Parallel && len >= MIN_PARALLEL_LEN
    }
}

/// `(0..n).map(f).collect()`, possibly in parallel.
pub fn map_range<T, F>(policy: ExecPolicy, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if policy.use_threads(n) {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = policy;
    (0..n).map(f).collect()
}

/// Applies `f(index, &mut item)` to every element.
pub fn for_each_indexed<T, F>(policy: ExecPolicy, items: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if policy.use_threads(items.len()) {
        items.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
        return;
    }
    let _ = policy;
    items.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
}

/// Deterministic `sum_{i<n} f(i)`.
pub fn sum<F>(policy: ExecPolicy, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = n.div_ceil(REDUCE_CHUNK);
    let partial = |c: usize| {
        let lo = c * REDUCE_CHUNK;
        let hi = (lo + REDUCE_CHUNK).min(n);
        let mut acc = 0.0;
        for i in lo..hi {
            acc += f(i);
        }
        acc
    };
    let parts: Vec<f64> = if policy.use_threads(n) {
        map_range(policy, chunks, partial)
    } else {
        (0..chunks).map(partial).collect()
    };
    parts.into_iter().sum()
}

/// Deterministic dot product.
pub fn dot(policy: ExecPolicy, a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    sum(policy, a.len(), |i| a[i] * b[i])
}

/// Runs independent jobs, returning results in input order.
pub fn run_jobs<J, T, F>(policy: ExecPolicy, jobs: Vec<J>, f: F) -> Vec<T>
where
    J: Send,
    T: Send,
    F: Fn(J) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if cfg!(feature = "parallel") && policy == ExecPolicy::Parallel && jobs.len() > 1 {
        return jobs.into_par_iter().map(f).collect();
    }
    let _ = policy;
    jobs.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn reductions_agree_bitwise(xs in proptest::collection::vec(-1e3f64..1e3, 0..5000)) {
            let s = sum(ExecPolicy::Sequential, xs.len(), |i| xs[i] * 1.5);
            let p = sum(ExecPolicy::Parallel, xs.len(), |i| xs[i] * 1.5);
            prop_assert_eq!(s.to_bits(), p.to_bits());
        }
    }

    #[test]
    fn map_preserves_order() {
        let v = map_range(ExecPolicy::Parallel, 5000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }

    #[test]
    fn jobs_keep_input_order() {
        let out = run_jobs(ExecPolicy::Parallel, vec![3, 1, 2], |j| j * 10);
        assert_eq!(out, vec![30, 10, 20]);
    }
}
