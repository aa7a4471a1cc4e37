//! The constructive Gaussian-weight approximation scheme: uniform
//! approximation of decaying targets by p(x)·e^{−c|x|²}, the inductive
//! exponent-reduction step, and its Taylor/Stirling error bound.
//!
//! Everything is real-valued and works on finite uniform grids; the sup over
//! ℝᵈ is replaced by the sup over the grid plus a separately reported tail
//! bound.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::fit;
use crate::par;

/// ln(n!) via a cached cumulative table (n ≤ 100 000).
fn ln_factorial(n: u64) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(100_001);
        t.push(0.0);
        let mut acc = 0.0f64;
        for j in 1..=100_000u64 {
            acc += (j as f64).ln();
            t.push(acc);
        }
        t
    });
    table[n as usize]
}

/// Lagrange remainder bound for approximating e^{−t} by its k-th Taylor
/// polynomial, evaluated at the maximizer t = k+1, together with the
/// Stirling cap that dominates it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorBound {
    /// e^{−(k+1)}(k+1)^{k+1}/(k+1)!
    pub bound: f64,
    /// (2π(k+1))^{−1/2}
    pub stirling_cap: f64,
}

/// Bound and cap in log-domain arithmetic; overflow-safe up to k = 10⁴ and
/// beyond.
pub fn taylor_gaussian_bound(k: u64) -> TaylorBound {
    let n = k + 1;
    let nf = n as f64;
    let log_bound = -nf + nf * nf.ln() - ln_factorial(n);
    TaylorBound {
        bound: log_bound.exp(),
        stirling_cap: 1.0 / (2.0 * std::f64::consts::PI * nf).sqrt(),
    }
}

/// k-th Taylor polynomial of e^z evaluated at −t by Horner.
pub fn taylor_exp_at_neg(k: usize, t: f64) -> f64 {
    // coefficients (−1)^j/j! folded into Horner in the variable −t
    let mut acc = 0.0f64;
    for j in (0..=k).rev() {
        acc = acc * (-t) + (-ln_factorial(j as u64)).exp();
    }
    acc
}

/// Grid check of the remainder estimate behind the exponent-reduction step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainderCheck {
    /// max over the grid of e^{−t}|e^{−t} − T_k(−t)|
    pub empirical_sup: f64,
    /// grid argmax of the remainder function
    pub argmax: f64,
    /// max over the grid of the Lagrange majorant e^{−t}t^{k+1}/(k+1)!
    pub majorant_sup: f64,
    /// grid argmax of the majorant (analytically k+1)
    pub majorant_argmax: f64,
    /// the Lagrange bound the sup must stay below
    pub bound: f64,
}

/// Default grid for [`verify_remainder_sup`]: [0, 4(k+1)] at step 0.01.
pub fn remainder_grid(k: u64) -> Vec<f64> {
    let hi = 4.0 * (k as f64 + 1.0);
    let n = (hi / 0.01).ceil() as usize;
    (0..=n).map(|i| hi * i as f64 / n as f64).collect()
}

/// Measure sup_t e^{−t}|e^{−t} − T_k(−t)| over a grid and check it against
/// [`taylor_gaussian_bound`]. The grid must cover [0, 4(k+1)] at step ≤ 0.01.
pub fn verify_remainder_sup(k: u64, grid: &[f64]) -> Result<RemainderCheck> {
    let hi_needed = 4.0 * (k as f64 + 1.0);
    if grid.is_empty() || grid[0] > 0.0 || *grid.last().unwrap() < hi_needed - 1e-9 {
        return Err(CoreError::InvalidGrid(format!(
            "grid must cover [0, {hi_needed}]"
        )));
    }
    let max_step = grid.windows(2).map(|p| p[1] - p[0]).fold(0.0f64, f64::max);
    if max_step > 0.01 + 1e-12 {
        return Err(CoreError::InvalidGrid(format!(
            "grid step {max_step} exceeds 0.01"
        )));
    }

    let kk = k as usize;
    let ln_fac = ln_factorial(k + 1);
    let evals = par::map_slice(grid, |&t| {
        let rem = (-t).exp() * ((-t).exp() - taylor_exp_at_neg(kk, t)).abs();
        let majorant = if t > 0.0 {
            (-t + (k as f64 + 1.0) * t.ln() - ln_fac).exp()
        } else {
            0.0
        };
        (rem, majorant)
    });

    let mut check = RemainderCheck {
        empirical_sup: 0.0,
        argmax: 0.0,
        majorant_sup: 0.0,
        majorant_argmax: 0.0,
        bound: taylor_gaussian_bound(k).bound,
    };
    for (&t, &(rem, maj)) in grid.iter().zip(&evals) {
        if rem > check.empirical_sup {
            check.empirical_sup = rem;
            check.argmax = t;
        }
        if maj > check.majorant_sup {
            check.majorant_sup = maj;
            check.majorant_argmax = t;
        }
    }
    Ok(check)
}

/// A real polynomial in d variables, keyed by multi-index.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPoly {
    dim: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl MultiPoly {
    pub fn zero(dim: usize) -> Self {
        MultiPoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        let mut p = Self::zero(dim);
        if value != 0.0 {
            p.terms.insert(vec![0; dim], value);
        }
        p
    }

    pub fn monomial(dim: usize, alpha: Vec<u32>, coeff: f64) -> Result<Self> {
        if alpha.len() != dim {
            return Err(CoreError::InvalidInput(format!(
                "multi-index of length {} in dimension {dim}",
                alpha.len()
            )));
        }
        let mut p = Self::zero(dim);
        if coeff != 0.0 {
            p.terms.insert(alpha, coeff);
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &f64)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|a| a.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(alpha, c)| {
                c * alpha
                    .iter()
                    .zip(x)
                    .map(|(&e, &xi)| xi.powi(e as i32))
                    .product::<f64>()
            })
            .sum()
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (alpha, c) in &other.terms {
            *out.terms.entry(alpha.clone()).or_insert(0.0) += c;
        }
        out.terms.retain(|_, c| *c != 0.0);
        out
    }

    pub fn scale(&self, s: f64) -> MultiPoly {
        if s == 0.0 {
            return Self::zero(self.dim);
        }
        MultiPoly {
            dim: self.dim,
            terms: self.terms.iter().map(|(a, c)| (a.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = Self::zero(self.dim);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let idx: Vec<u32> = a.iter().zip(b).map(|(&x, &y)| x + y).collect();
                *out.terms.entry(idx).or_insert(0.0) += ca * cb;
            }
        }
        out.terms.retain(|_, c| *c != 0.0);
        out
    }

    /// |x|² = x₁² + … + x_d².
    pub fn norm_squared(dim: usize) -> MultiPoly {
        let mut p = Self::zero(dim);
        for i in 0..dim {
            let mut alpha = vec![0u32; dim];
            alpha[i] = 2;
            p.terms.insert(alpha, 1.0);
        }
        p
    }

    /// T_k(−|x|²) = Σ_{j≤k} (−1)ʲ|x|^{2j}/j!.
    pub fn taylor_of_neg_norm_squared(dim: usize, k: usize) -> MultiPoly {
        let r2 = Self::norm_squared(dim);
        let mut out = Self::constant(dim, 1.0);
        let mut power = Self::constant(dim, 1.0);
        for j in 1..=k {
            power = power.mul(&r2);
            let coeff = if j % 2 == 0 { 1.0 } else { -1.0 } * (-ln_factorial(j as u64)).exp();
            out = out.add(&power.scale(coeff));
        }
        out
    }
}

/// p(x)·e^{−c|x|²}: a polynomial against the Gaussian weight; decays at
/// infinity for any p since c > 0.
#[derive(Debug, Clone)]
pub struct GaussApproximant {
    pub poly: MultiPoly,
    pub c: f64,
    pub dim: usize,
}

impl GaussApproximant {
    pub fn new(poly: MultiPoly, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(CoreError::InvalidInput(format!(
                "gaussian rate c = {c} must be positive"
            )));
        }
        let dim = poly.dim();
        Ok(GaussApproximant { poly, c, dim })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        self.poly.eval(x) * (-self.c * r2).exp()
    }
}

/// p(x)·e^{−m|x|²}·e^{−c|x|²}: the intermediate object of the inductive
/// exponent reduction. m = 0 is a pure member of Π(x)·e^{−c|x|²}.
#[derive(Debug, Clone)]
pub struct GaussTower {
    pub poly: MultiPoly,
    pub extra_exponent: u32,
    pub c: f64,
}

impl GaussTower {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        self.poly.eval(x) * (-(self.extra_exponent as f64) * r2).exp() * (-self.c * r2).exp()
    }
}

/// Outcome of one exponent-reduction step.
#[derive(Debug, Clone)]
pub struct ExponentStep {
    pub tower: GaussTower,
    /// measured sup over the grid of |input − output|
    pub sup_gap: f64,
    /// C = ‖p·e^{−(n+1)|x|²}‖_∞ measured on the grid
    pub c_factor: f64,
    /// C · taylor_gaussian_bound(k).bound
    pub gap_bound: f64,
}

/// One step of the induction: replace p·e^{−(n+1)|x|²}·e^{−c|x|²} by
/// (p·T_k(−|x|²))·e^{−n|x|²}·e^{−c|x|²}. The sup gap over the grid is
/// guaranteed ≤ C·bound(k) with C the measured sup of p·e^{−(n+1)|x|²}.
pub fn reduce_exponent_step(
    tower: &GaussTower,
    k: usize,
    grid_points: &[Vec<f64>],
) -> Result<ExponentStep> {
    if tower.extra_exponent == 0 {
        return Err(CoreError::InvalidInput(
            "exponent already reduced to zero".into(),
        ));
    }
    let n_plus_1 = tower.extra_exponent;
    let reduced = GaussTower {
        poly: tower
            .poly
            .mul(&MultiPoly::taylor_of_neg_norm_squared(tower.poly.dim(), k)),
        extra_exponent: n_plus_1 - 1,
        c: tower.c,
    };
    if tower.poly.is_zero() {
        return Ok(ExponentStep {
            tower: reduced,
            sup_gap: 0.0,
            c_factor: 0.0,
            gap_bound: 0.0,
        });
    }

    let evals = par::map_slice(grid_points, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let p = tower.poly.eval(x);
        let gap = (tower.eval(x) - reduced.eval(x)).abs();
        let cfac = (p * (-(n_plus_1 as f64) * r2).exp()).abs();
        (gap, cfac)
    });
    let sup_gap = evals.iter().map(|e| e.0).fold(0.0, f64::max);
    let c_factor = evals.iter().map(|e| e.1).fold(0.0, f64::max);
    Ok(ExponentStep {
        tower: reduced,
        sup_gap,
        c_factor,
        gap_bound: c_factor * taylor_gaussian_bound(k as u64).bound,
    })
}

/// Function samples on a uniform cubic grid, row-major with the last
/// coordinate fastest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridFn {
    pub dim: usize,
    pub step: f64,
    pub origin: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridFn {
    /// Points per axis; values must form a cubic grid.
    pub fn side(&self) -> Result<usize> {
        if self.dim == 0 || self.dim > 3 {
            return Err(CoreError::InvalidGrid(format!(
                "dimension {} out of supported range 1..=3",
                self.dim
            )));
        }
        if self.origin.len() != self.dim {
            return Err(CoreError::InvalidGrid(
                "origin length does not match dimension".into(),
            ));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(CoreError::InvalidGrid(format!("bad step {}", self.step)));
        }
        let n = (self.values.len() as f64)
            .powf(1.0 / self.dim as f64)
            .round() as usize;
        if n == 0 || n.pow(self.dim as u32) != self.values.len() {
            return Err(CoreError::InvalidGrid(format!(
                "{} values do not form a cubic grid in dimension {}",
                self.values.len(),
                self.dim
            )));
        }
        Ok(n)
    }

    pub fn points(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.side()?;
        let mut pts = Vec::with_capacity(self.values.len());
        let mut idx = vec![0usize; self.dim];
        for _ in 0..self.values.len() {
            pts.push(
                idx.iter()
                    .zip(&self.origin)
                    .map(|(&i, &o)| o + i as f64 * self.step)
                    .collect(),
            );
            for axis in (0..self.dim).rev() {
                idx[axis] += 1;
                if idx[axis] < n {
                    break;
                }
                idx[axis] = 0;
            }
        }
        Ok(pts)
    }

    /// Sample a function on the uniform grid [−extent, extent]^dim.
    pub fn sample<F: Fn(&[f64]) -> f64>(
        dim: usize,
        extent: f64,
        step: f64,
        f: F,
    ) -> Result<GridFn> {
        if dim == 0 || dim > 3 {
            return Err(CoreError::InvalidGrid(format!(
                "dimension {dim} out of supported range 1..=3"
            )));
        }
        let n = (2.0 * extent / step).round() as usize + 1;
        let origin = vec![-extent; dim];
        let mut grid = GridFn {
            dim,
            step,
            origin,
            values: vec![0.0; n.pow(dim as u32)],
        };
        let pts = grid.points()?;
        grid.values = pts.iter().map(|p| f(p)).collect();
        Ok(grid)
    }
}

/// Multi-indices of total degree ≤ `max_degree`, ordered by (total degree,
/// lexicographic), so degree-d prefixes are nested.
pub fn multi_indices(dim: usize, max_degree: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for d in 0..=max_degree as u32 {
        let mut idx = vec![0u32; dim];
        emit_fixed_degree(dim, d, 0, &mut idx, &mut out);
    }
    out
}

fn emit_fixed_degree(
    dim: usize,
    left: u32,
    axis: usize,
    idx: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    if axis + 1 == dim {
        idx[axis] = left;
        out.push(idx.clone());
        idx[axis] = 0;
        return;
    }
    for e in (0..=left).rev() {
        idx[axis] = e;
        emit_fixed_degree(dim, left - e, axis + 1, idx, out);
        idx[axis] = 0;
    }
}

/// Per-degree outcome of the Gaussian-weighted sup fit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GaussProfilePoint {
    pub degree: usize,
    pub sup_error: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct GaussFit {
    pub approximant: GaussApproximant,
    pub sup_error: f64,
    pub converged: bool,
    /// Reported separately: the Gaussian weight at the grid boundary, a bound
    /// on what the grid truncation can hide per unit of polynomial growth.
    pub tail_weight: f64,
    pub profile: Vec<GaussProfilePoint>,
}

/// Best sup-norm fit of p·e^{−c|x|²} to grid samples of a decaying target,
/// over the degree schedule. Errors are nonincreasing along the schedule
/// (the best earlier approximant is carried forward across nested spans).
pub fn gaussian_weighted_sup_approx(
    target: &GridFn,
    c: f64,
    degrees: &[usize],
    lawson_iters: usize,
) -> Result<GaussFit> {
    if !(c.is_finite() && c > 0.0) {
        return Err(CoreError::InvalidInput(format!(
            "gaussian rate c = {c} must be positive"
        )));
    }
    if degrees.is_empty() {
        return Err(CoreError::InvalidInput("empty degree schedule".into()));
    }
    let pts = target.points()?;
    let n = pts.len();
    let max_degree = *degrees.iter().max().unwrap();
    let alphas = multi_indices(target.dim, max_degree);

    // Gaussian-weighted monomial columns, orthonormalized once under uniform
    // grid weights; per-degree prefixes stay nested.
    let gauss: Vec<f64> = pts
        .iter()
        .map(|x| (-c * x.iter().map(|v| v * v).sum::<f64>()).exp())
        .collect();
    let columns: Vec<Vec<f64>> = alphas
        .iter()
        .map(|alpha| {
            par::map_indexed(n, |i| {
                let mono: f64 = alpha
                    .iter()
                    .zip(&pts[i])
                    .map(|(&e, &x)| x.powi(e as i32))
                    .product();
                mono * gauss[i]
            })
        })
        .collect();
    let uniform = vec![1.0 / n as f64; n];
    let qr = fit::qr_real(columns, &uniform);

    let mut sorted: Vec<usize> = degrees.to_vec();
    sorted.sort_unstable();
    sorted.dedup();

    let mut profile = Vec::with_capacity(sorted.len());
    let mut best: Option<(Vec<f64>, usize, f64, bool)> = None; // (coeffs over Q, m, sup, conv)
    let mut lam: Option<Vec<f64>> = None;
    for &d in &sorted {
        let m = alphas
            .iter()
            .take_while(|a| a.iter().sum::<u32>() <= d as u32)
            .count();
        // Blend the carried weights with uniform: a pure multiplicative
        // restart can never revive a point whose weight decayed to zero at a
        // lower degree, and the larger span usually needs some of them back.
        let start: Option<Vec<f64>> = lam.as_ref().map(|l| {
            let u = 1.0 / n as f64;
            l.iter().map(|&x| 0.5 * (x + u)).collect()
        });
        let out = fit::lawson_sup_real(
            &qr.q[..m],
            &target.values,
            lawson_iters,
            fit::LAWSON_REL_TOL,
            start.as_deref(),
        );
        lam = Some(out.final_weights.clone());
        if best.as_ref().is_none_or(|b| out.residual < b.2) {
            best = Some((out.coeffs.clone(), m, out.residual, out.converged));
        }
        let b = best.as_ref().unwrap();
        profile.push(GaussProfilePoint {
            degree: d,
            sup_error: b.2,
            converged: out.converged,
        });
    }

    let (coeffs_q, m, sup_error, converged) = best.unwrap();
    let mut padded = coeffs_q;
    padded.resize(qr.q.len(), 0.0);
    let mono_coeffs = qr.back_solve(&padded);
    let mut poly = MultiPoly::zero(target.dim);
    for (alpha, &a) in alphas.iter().take(m.max(1)).zip(&mono_coeffs) {
        if a != 0.0 {
            poly = poly.add(&MultiPoly::monomial(target.dim, alpha.clone(), a)?);
        }
    }
    let tail_weight = pts
        .iter()
        .map(|x| x.iter().map(|v| v * v).sum::<f64>())
        .fold(0.0f64, f64::max);
    Ok(GaussFit {
        approximant: GaussApproximant::new(poly, c)?,
        sup_error,
        converged,
        tail_weight: (-c * tail_weight).exp(),
        profile,
    })
}
