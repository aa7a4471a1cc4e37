//! Shared least-squares machinery: weighted L² solves by modified
//! Gram–Schmidt, iteratively reweighted least squares for Lᵖ, and Lawson's
//! multiplicative-weight iteration for the sup norm.
//!
//! Everything here works on explicit column families (one sampled vector per
//! basis element), so the same solvers serve plain polynomial bases,
//! weight-multiplied bases, multi-generator families, and Gaussian-weighted
//! monomials.

use num_complex::Complex64;

use crate::measure::Norm;
use crate::par;

/// Relative drop below which a column counts as linearly dependent.
const RANK_TOL: f64 = 1e-13;

/// Clamp interval for IRLS weight factors |r|^{p−2}.
const IRLS_CLAMP: (f64, f64) = (1e-12, 1e12);

pub const IRLS_MAX_ITER: usize = 200;
pub const IRLS_RESIDUAL_TOL: f64 = 1e-9;
pub const LAWSON_MAX_ITER: usize = 500;
pub const LAWSON_REL_TOL: f64 = 1e-6;

/// Σⱼ cⱼ·colⱼ evaluated per row.
pub fn eval_combo(columns: &[Vec<Complex64>], coeffs: &[Complex64], n: usize) -> Vec<Complex64> {
    par::map_indexed(n, |i| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, col) in coeffs.iter().zip(columns) {
            acc += c * col[i];
        }
        acc
    })
}

fn residual_vec(
    columns: &[Vec<Complex64>],
    coeffs: &[Complex64],
    target: &[Complex64],
) -> Vec<Complex64> {
    par::map_indexed(target.len(), |i| {
        let mut acc = target[i];
        for (c, col) in coeffs.iter().zip(columns) {
            acc -= c * col[i];
        }
        acc
    })
}

/// Lᵖ size of a residual vector under the library's p < 1 metric convention.
pub fn lp_residual(w: &[f64], r: &[Complex64], norm: Norm) -> f64 {
    match norm {
        Norm::Sup => r.iter().map(|v| v.norm()).fold(0.0, f64::max),
        Norm::P(p) => {
            let s = par::weighted_pow_norm(w, r, p);
            if p >= 1.0 {
                s.powf(1.0 / p)
            } else {
                s
            }
        }
    }
}

/// QR of a complex column family under the weighted inner product; Q columns
/// are orthonormal and prefix-nested (MGS order), so degree-prefix
/// projections reuse one factorization.
pub struct ComplexQr {
    pub q: Vec<Vec<Complex64>>,
    pub r: Vec<Vec<Complex64>>,
    pub live: Vec<bool>,
}

pub fn qr_complex(columns: &[Vec<Complex64>], w: &[f64]) -> ComplexQr {
    let m = columns.len();
    let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    let mut r = vec![vec![Complex64::new(0.0, 0.0); m]; m];
    let mut live = vec![true; m];

    for j in 0..m {
        let mut v = columns[j].clone();
        let norm0 = par::norm_sq(w, &v).sqrt();
        for _pass in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                if !live[i] {
                    continue;
                }
                let rij = par::inner(w, &v, qi);
                for (vk, qk) in v.iter_mut().zip(qi) {
                    *vk -= rij * qk;
                }
                r[i][j] += rij;
            }
        }
        let rjj = par::norm_sq(w, &v).sqrt();
        if rjj.is_nan() || rjj <= RANK_TOL * norm0.max(f64::MIN_POSITIVE) {
            live[j] = false;
            q.push(vec![Complex64::new(0.0, 0.0); v.len()]);
            continue;
        }
        r[j][j] = rjj.into();
        let inv = 1.0 / rjj;
        for vk in v.iter_mut() {
            *vk *= inv;
        }
        q.push(v);
    }
    ComplexQr { q, r, live }
}

/// Minimize Σᵢ wᵢ|tᵢ − Σⱼ cⱼ Aᵢⱼ|² by MGS with one reorthogonalization pass.
/// Columns that become numerically dependent get coefficient zero.
pub fn weighted_lsq(columns: &[Vec<Complex64>], w: &[f64], target: &[Complex64]) -> Vec<Complex64> {
    let qr = qr_complex(columns, w);
    let m = columns.len();
    let mut c = vec![Complex64::new(0.0, 0.0); m];
    let y: Vec<Complex64> = (0..m)
        .map(|j| {
            if qr.live[j] {
                par::inner(w, target, &qr.q[j])
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    for j in (0..m).rev() {
        if !qr.live[j] {
            continue;
        }
        let mut acc = y[j];
        for k in j + 1..m {
            acc -= qr.r[j][k] * c[k];
        }
        c[j] = acc / qr.r[j][j];
    }
    c
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub coeffs: Vec<Complex64>,
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Best Lᵖ fit by Lawson-type iteratively reweighted least squares.
///
/// Weights wᵢ·|rᵢ|^{p−2} are clamped to [1e−12, 1e12]; for p < 1 weight
/// updates are damped by a geometric half-step since the problem is
/// nonconvex and only a local certificate is claimed. Returns the best
/// iterate seen; `converged` reports whether the residual settled below the
/// change tolerance within the iteration budget.
pub fn irls_lp(
    columns: &[Vec<Complex64>],
    w: &[f64],
    target: &[Complex64],
    p: f64,
    initial: Option<&[Complex64]>,
    max_iter: usize,
) -> FitOutcome {
    let norm = Norm::P(p);
    let mut coeffs = match initial {
        Some(c0) => {
            let mut c = c0.to_vec();
            c.resize(columns.len(), Complex64::new(0.0, 0.0));
            c
        }
        None => weighted_lsq(columns, w, target),
    };
    let mut r = residual_vec(columns, &coeffs, target);
    let mut res = lp_residual(w, &r, norm);

    if (p - 2.0).abs() < 1e-15 && initial.is_none() {
        return FitOutcome {
            coeffs,
            residual: res,
            converged: true,
            iterations: 1,
        };
    }

    let mut best = coeffs.clone();
    let mut best_res = res;
    let mut omega: Vec<f64> = w.to_vec();
    let mut converged = false;
    let mut iterations = 0;

    for it in 0..max_iter {
        iterations = it + 1;
        let fresh: Vec<f64> = w
            .iter()
            .zip(&r)
            .map(|(&wi, ri)| {
                let factor = ri.norm().powf(p - 2.0).clamp(IRLS_CLAMP.0, IRLS_CLAMP.1);
                wi * factor
            })
            .collect();
        omega = if p < 1.0 {
            omega
                .iter()
                .zip(&fresh)
                .map(|(&a, &b)| (a * b).sqrt())
                .collect()
        } else {
            fresh
        };
        coeffs = weighted_lsq(columns, &omega, target);
        r = residual_vec(columns, &coeffs, target);
        let new_res = lp_residual(w, &r, norm);
        if new_res < best_res {
            best_res = new_res;
            best = coeffs.clone();
        }
        if (new_res - res).abs() < IRLS_RESIDUAL_TOL {
            converged = true;
            break;
        }
        res = new_res;
    }

    FitOutcome {
        coeffs: best,
        residual: best_res,
        converged,
        iterations,
    }
}

/// Lawson's sup-norm iteration: weighted L² solves with multiplicative weight
/// updates proportional to the pointwise error. Stops when the weighted-L²
/// lower bound matches the sup residual within `rel_tol` (equioscillation) or
/// the iteration budget runs out. Ties in the update keep the previous
/// weights. The returned residual is the measured sup error of the returned
/// coefficients, a certified upper bound.
pub fn lawson_sup(
    columns: &[Vec<Complex64>],
    target: &[Complex64],
    max_iter: usize,
    rel_tol: f64,
    initial_weights: Option<&[f64]>,
) -> FitOutcome {
    let n = target.len();
    let mut lam: Vec<f64> = match initial_weights {
        Some(l0) => l0.to_vec(),
        None => vec![1.0 / n as f64; n],
    };
    normalize(&mut lam);

    let mut best: Option<(Vec<Complex64>, f64)> = None;
    let mut converged = false;
    let mut iterations = 0;

    for it in 0..max_iter {
        iterations = it + 1;
        let coeffs = weighted_lsq(columns, &lam, target);
        let r = residual_vec(columns, &coeffs, target);
        let sup = r.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let lower = par::weighted_pow_norm(&lam, &r, 2.0).sqrt();
        if best.as_ref().is_none_or(|(_, s)| sup < *s) {
            best = Some((coeffs, sup));
        }
        if sup <= 1e-14 * scale_of(target) || sup - lower <= rel_tol * sup {
            converged = true;
            break;
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for v in &r {
            let a = v.norm();
            lo = lo.min(a);
            hi = hi.max(a);
        }
        if hi - lo <= 1e-12 * hi {
            // All pointwise errors agree: keep previous weights.
            converged = true;
            break;
        }
        for (l, v) in lam.iter_mut().zip(&r) {
            *l *= v.norm();
        }
        normalize(&mut lam);
    }

    let (coeffs, residual) = best.expect("at least one Lawson iterate");
    FitOutcome {
        coeffs,
        residual,
        converged,
        iterations,
    }
}

fn normalize(lam: &mut [f64]) {
    let s: f64 = lam.iter().sum();
    if s > 0.0 {
        for l in lam.iter_mut() {
            *l /= s;
        }
    } else {
        let u = 1.0 / lam.len() as f64;
        lam.fill(u);
    }
}

fn scale_of(target: &[Complex64]) -> f64 {
    target.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0)
}

// ---------------------------------------------------------------------------
// Real-valued counterparts for the Gaussian-weight kernels, where everything
// is real and the complex solvers would double the flop count.
// ---------------------------------------------------------------------------

/// QR of a real column family under weights `w`; keeps Q and R so solutions
/// over Q can be mapped back to the original columns.
pub struct RealQr {
    pub q: Vec<Vec<f64>>,
    pub r: Vec<Vec<f64>>,
    pub live: Vec<bool>,
}

pub fn qr_real(columns: Vec<Vec<f64>>, w: &[f64]) -> RealQr {
    let m = columns.len();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut r = vec![vec![0.0f64; m]; m];
    let mut live = vec![true; m];
    for (j, mut v) in columns.into_iter().enumerate() {
        let norm0 = par::norm_sq_real(w, &v).sqrt();
        for _pass in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                if !live[i] {
                    continue;
                }
                let rij = par::inner_real(w, &v, qi);
                for (vk, qk) in v.iter_mut().zip(qi) {
                    *vk -= rij * qk;
                }
                r[i][j] += rij;
            }
        }
        let rjj = par::norm_sq_real(w, &v).sqrt();
        if rjj.is_nan() || rjj <= RANK_TOL * norm0.max(f64::MIN_POSITIVE) {
            live[j] = false;
            q.push(vec![0.0; v.len()]);
            continue;
        }
        r[j][j] = rjj;
        let inv = 1.0 / rjj;
        for vk in v.iter_mut() {
            *vk *= inv;
        }
        q.push(v);
    }
    RealQr { q, r, live }
}

impl RealQr {
    /// Map coefficients over Q back to the original columns: solves R a = c.
    pub fn back_solve(&self, c: &[f64]) -> Vec<f64> {
        let m = c.len();
        let mut a = vec![0.0f64; m];
        for j in (0..m).rev() {
            if !self.live[j] {
                continue;
            }
            let mut acc = c[j];
            for k in j + 1..m {
                acc -= self.r[j][k] * a[k];
            }
            a[j] = acc / self.r[j][j];
        }
        a
    }
}

pub fn weighted_lsq_real(columns: &[Vec<f64>], w: &[f64], target: &[f64]) -> Vec<f64> {
    let m = columns.len();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut r = vec![vec![0.0f64; m]; m];
    let mut live = vec![true; m];
    for j in 0..m {
        let mut v = columns[j].clone();
        let norm0 = par::norm_sq_real(w, &v).sqrt();
        for _pass in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                if !live[i] {
                    continue;
                }
                let rij = par::inner_real(w, &v, qi);
                for (vk, qk) in v.iter_mut().zip(qi) {
                    *vk -= rij * qk;
                }
                r[i][j] += rij;
            }
        }
        let rjj = par::norm_sq_real(w, &v).sqrt();
        if rjj.is_nan() || rjj <= RANK_TOL * norm0.max(f64::MIN_POSITIVE) {
            live[j] = false;
            q.push(vec![0.0; v.len()]);
            continue;
        }
        r[j][j] = rjj;
        let inv = 1.0 / rjj;
        for vk in v.iter_mut() {
            *vk *= inv;
        }
        q.push(v);
    }
    let mut c = vec![0.0f64; m];
    let y: Vec<f64> = (0..m)
        .map(|j| {
            if live[j] {
                par::inner_real(w, target, &q[j])
            } else {
                0.0
            }
        })
        .collect();
    for j in (0..m).rev() {
        if !live[j] {
            continue;
        }
        let mut acc = y[j];
        for k in j + 1..m {
            acc -= r[j][k] * c[k];
        }
        c[j] = acc / r[j][j];
    }
    c
}

#[derive(Debug, Clone)]
pub struct RealFitOutcome {
    pub coeffs: Vec<f64>,
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
    pub final_weights: Vec<f64>,
}

/// Real-valued Lawson iteration over an explicit column family.
pub fn lawson_sup_real(
    columns: &[Vec<f64>],
    target: &[f64],
    max_iter: usize,
    rel_tol: f64,
    initial_weights: Option<&[f64]>,
) -> RealFitOutcome {
    let n = target.len();
    let mut lam: Vec<f64> = match initial_weights {
        Some(l0) => l0.to_vec(),
        None => vec![1.0 / n as f64; n],
    };
    normalize(&mut lam);
    let scale = target.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1.0);

    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut converged = false;
    let mut iterations = 0;

    for it in 0..max_iter {
        iterations = it + 1;
        let coeffs = weighted_lsq_real(columns, &lam, target);
        let r: Vec<f64> = par::map_indexed(n, |i| {
            let mut acc = target[i];
            for (c, col) in coeffs.iter().zip(columns) {
                acc -= c * col[i];
            }
            acc
        });
        let sup = r.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let lower = par::norm_sq_real(&lam, &r).sqrt();
        if best.as_ref().is_none_or(|(_, s)| sup < *s) {
            best = Some((coeffs, sup));
        }
        if sup <= 1e-14 * scale || sup - lower <= rel_tol * sup {
            converged = true;
            break;
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for v in &r {
            lo = lo.min(v.abs());
            hi = hi.max(v.abs());
        }
        if hi - lo <= 1e-12 * hi {
            converged = true;
            break;
        }
        for (l, v) in lam.iter_mut().zip(&r) {
            *l *= v.abs();
        }
        normalize(&mut lam);
    }

    let (coeffs, residual) = best.expect("at least one Lawson iterate");
    RealFitOutcome {
        coeffs,
        residual,
        converged,
        iterations,
        final_weights: lam,
    }
}
