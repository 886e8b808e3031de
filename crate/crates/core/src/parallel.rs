//! Data-parallel helpers. With the `parallel` feature these fan out over the
//! rayon pool; without it they run the same closures sequentially. Results
//! never depend on which path ran.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many items the sequential path is used even when parallelism
/// is available.
pub const MIN_PARALLEL_ITEMS: usize = 1 << 10;

/// `true` iff `f` holds for every index in `0..n`.
pub fn all_indices<F>(n: usize, f: F) -> bool
where
    F: Fn(usize) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if n >= MIN_PARALLEL_ITEMS {
            return (0..n).into_par_iter().all(f);
        }
    }
    (0..n).all(f)
}

/// `(0..n).map(f).collect()`, order preserved.
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if n > 1 {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Applies `f` to consecutive chunks of `data`, each `chunk` long. The chunk
/// index is passed alongside.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if data.len() >= MIN_PARALLEL_ITEMS * 4 {
            let min_chunks = (MIN_PARALLEL_ITEMS / chunk).max(1);
            data.par_chunks_mut(chunk)
                .with_min_len(min_chunks)
                .enumerate()
                .for_each(|(i, c)| f(i, c));
            return;
        }
    }
    data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}

/// Calls `f(i, &mut lo, &mut hi)` for every index pair `(i, i + stride)`
/// with bit `stride` clear in `i`. `stride` must be a power of two and
/// `data.len()` a multiple of `2 * stride`.
pub fn for_each_pair_mut<T, F>(data: &mut [T], stride: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut T, &mut T) + Sync + Send,
{
    let block = stride * 2;
    let run = |bi: usize, chunk: &mut [T]| {
        let (lo, hi) = chunk.split_at_mut(stride);
        for (k, (a, b)) in lo.iter_mut().zip(hi).enumerate() {
            f(bi * block + k, a, b);
        }
    };
    #[cfg(feature = "parallel")]
    {
        if data.len() >= MIN_PARALLEL_ITEMS * 16 {
            if data.len() / block >= 64 {
                data.par_chunks_mut(block).enumerate().for_each(|(bi, c)| run(bi, c));
            } else {
                for (bi, chunk) in data.chunks_mut(block).enumerate() {
                    let (lo, hi) = chunk.split_at_mut(stride);
                    lo.par_iter_mut()
                        .zip(hi.par_iter_mut())
                        .enumerate()
                        .for_each(|(k, (a, b))| f(bi * block + k, a, b));
                }
            }
            return;
        }
    }
    data.chunks_mut(block).enumerate().for_each(|(bi, c)| run(bi, c));
}

/// Calls `f(i, &mut data[i])` for every element.
pub fn for_each_indexed_mut<T, F>(data: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if data.len() >= MIN_PARALLEL_ITEMS * 16 {
            data.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
            return;
        }
    }
    data.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
}

/// Sum of `f` over `data`. Partial sums are taken over fixed blocks and
/// combined in order, so the result is bit-identical on both paths.
pub fn sum_by<T, F>(data: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(usize, &T) -> f64 + Sync + Send,
{
    const BLOCK: usize = 1 << 12;
    let blocks = data.len().div_ceil(BLOCK);
    let partial = map_indices(blocks, |b| {
        let start = b * BLOCK;
        let end = (start + BLOCK).min(data.len());
        data[start..end]
            .iter()
            .enumerate()
            .map(|(i, x)| f(start + i, x))
            .sum::<f64>()
    });
    partial.into_iter().sum()
}

/// Runs `f` with data parallelism disabled. Used by benches to compare the
/// two paths in one binary.
pub fn sequential<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("single-thread pool")
            .install(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        f()
    }
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn helpers_match_sequential_results() {
        assert!(all_indices(5000, |i| i < 5000));
        assert!(!all_indices(5000, |i| i != 4321));
        assert_eq!(map_indices(100, |i| i * 2)[37], 74);
        let mut v = vec![0usize; 10_000];
        for_each_chunk_mut(&mut v, 4, |ci, c| c.iter_mut().for_each(|x| *x = ci));
        assert_eq!(v[9_999], 2_499);
        let s = sum_by(&v, |_, &x| x as f64);
        let expect: f64 = v.iter().map(|&x| x as f64).sum();
        assert_eq!(s, expect);
        assert_eq!(sequential(|| map_indices(3, |i| i)), vec![0, 1, 2]);
        for len in [8usize, 1 << 16] {
            for stride in [1usize, 2, len / 2] {
                let mut w: Vec<usize> = (0..len).collect();
                for_each_pair_mut(&mut w, stride, |i, a, b| {
                    assert_eq!(*a, i);
                    assert_eq!(*b, i + stride);
                    std::mem::swap(a, b);
                });
                assert_eq!(w[0], stride);
            }
        }
        let mut z = vec![0usize; 1 << 15];
        for_each_indexed_mut(&mut z, |i, x| *x = i);
        assert_eq!(z[12345], 12345);
    }
}
