//! Data-parallel helpers with a sequential fallback when the `parallel`
//! feature is disabled.
//!
//! Reductions over floats are chunked with fixed boundaries so results are
//! bit-identical regardless of thread count (and identical to the sequential
//! build, which walks the same chunks).

use num_complex::Complex64;

/// Fixed reduction chunk size; never depends on the thread pool.
pub const CHUNK: usize = 8192;

/// Cap the global thread pool (the CYCLAB_THREADS hook). Returns false when
/// the pool was already initialized or parallelism is compiled out.
#[cfg(feature = "parallel")]
pub fn configure_thread_cap(n: usize) -> bool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n.max(1))
        .build_global()
        .is_ok()
}

#[cfg(not(feature = "parallel"))]
pub fn configure_thread_cap(_n: usize) -> bool {
    false
}

/// Row maps have cheap per-item work; below this length the split overhead
/// outweighs the gain.
#[cfg(feature = "parallel")]
const ROW_PAR_MIN: usize = 4096;

#[cfg(feature = "parallel")]
pub fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    if n < ROW_PAR_MIN {
        return (0..n).map(f).collect();
    }
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Reductions are memory-bound; below this length the fork-join per call
/// costs more than the bandwidth it buys. The chunk boundaries are the same
/// either way, so results do not depend on which path runs.
const SUM_PAR_MIN: usize = 1 << 17;

fn chunk_sums<F>(n: usize, partial: F) -> Vec<f64>
where
    F: Fn(usize, usize) -> f64 + Sync + Send,
{
    if n <= CHUNK {
        return vec![partial(0, n)];
    }
    let bounds: Vec<(usize, usize)> = (0..n)
        .step_by(CHUNK)
        .map(|lo| (lo, (lo + CHUNK).min(n)))
        .collect();
    if n < SUM_PAR_MIN {
        return bounds.iter().map(|&(lo, hi)| partial(lo, hi)).collect();
    }
    map_slice(&bounds, |&(lo, hi)| partial(lo, hi))
}

/// Σᵢ wᵢ·|fᵢ − gᵢ|ᵖ with deterministic chunked accumulation.
pub fn weighted_pow_sum(w: &[f64], f: &[Complex64], g: &[Complex64], p: f64) -> f64 {
    let parts = chunk_sums(w.len(), |lo, hi| {
        let mut acc = 0.0;
        for i in lo..hi {
            let d = (f[i] - g[i]).norm();
            acc += w[i] * d.powf(p);
        }
        acc
    });
    parts.iter().sum()
}

/// Σᵢ wᵢ·|fᵢ|ᵖ with deterministic chunked accumulation.
pub fn weighted_pow_norm(w: &[f64], f: &[Complex64], p: f64) -> f64 {
    let parts = chunk_sums(w.len(), |lo, hi| {
        let mut acc = 0.0;
        for i in lo..hi {
            acc += w[i] * f[i].norm().powf(p);
        }
        acc
    });
    parts.iter().sum()
}

/// Weighted complex inner product ⟨f, g⟩ = Σᵢ wᵢ fᵢ ḡᵢ.
pub fn inner(w: &[f64], f: &[Complex64], g: &[Complex64]) -> Complex64 {
    let n = w.len();
    let chunk_sum = |lo: usize, hi: usize| {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in lo..hi {
            acc += w[i] * f[i] * g[i].conj();
        }
        acc
    };
    if n <= CHUNK {
        return chunk_sum(0, n);
    }
    let bounds: Vec<(usize, usize)> = (0..n)
        .step_by(CHUNK)
        .map(|lo| (lo, (lo + CHUNK).min(n)))
        .collect();
    let parts: Vec<Complex64> = if n < SUM_PAR_MIN {
        bounds.iter().map(|&(lo, hi)| chunk_sum(lo, hi)).collect()
    } else {
        map_slice(&bounds, |&(lo, hi)| chunk_sum(lo, hi))
    };
    parts.iter().sum()
}

/// Weighted squared norm Σᵢ wᵢ|fᵢ|².
pub fn norm_sq(w: &[f64], f: &[Complex64]) -> f64 {
    let parts = chunk_sums(w.len(), |lo, hi| {
        let mut acc = 0.0;
        for i in lo..hi {
            acc += w[i] * f[i].norm_sqr();
        }
        acc
    });
    parts.iter().sum()
}

/// Real-valued counterparts used by the Gaussian-weight kernels.
pub fn inner_real(w: &[f64], f: &[f64], g: &[f64]) -> f64 {
    let parts = chunk_sums(w.len(), |lo, hi| {
        let mut acc = 0.0;
        for i in lo..hi {
            acc += w[i] * f[i] * g[i];
        }
        acc
    });
    parts.iter().sum()
}

pub fn norm_sq_real(w: &[f64], f: &[f64]) -> f64 {
    inner_real(w, f, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_sums_match_sequential_on_small_input() {
        let w = vec![0.5, 0.25, 0.25];
        let f: Vec<Complex64> = vec![1.0.into(), 2.0.into(), Complex64::new(0.0, 3.0)];
        let g = vec![Complex64::new(0.0, 0.0); 3];
        let direct: f64 = (0..3).map(|i| w[i] * f[i].norm_sqr()).sum();
        assert_eq!(norm_sq(&w, &f), direct);
        assert_eq!(weighted_pow_sum(&w, &f, &g, 2.0), direct);
    }

    #[test]
    fn map_indexed_preserves_order() {
        let v = map_indexed(1000, |i| i * i);
        assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
    }
}
