//! Best polynomial approximation of a sampled target with respect to a
//! discrete measure, in L²(μ), Lᵖ(μ), and the sup norm, and residual-vs-degree
//! profiles with an optional weight factor.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::fit;
use crate::measure::{DiscreteMeasure, Norm, SampledFunction};
use crate::par;
use crate::poly::basis::{build_ortho_basis, build_weighted, OrthoBasis};
use crate::poly::Polynomial;

#[derive(Debug, Clone)]
pub struct ApproxResult {
    pub poly: Polynomial,
    pub residual: f64,
    pub converged: bool,
}

/// One entry of a residual-vs-degree profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub degree: usize,
    pub residual: f64,
    pub converged: bool,
}

fn projection_coeffs(
    basis: &OrthoBasis,
    mu: &DiscreteMeasure,
    target: &[Complex64],
) -> Vec<Complex64> {
    (0..basis.rank())
        .map(|k| par::inner(mu.weights(), target, basis.sampled(k)))
        .collect()
}

fn direct_residual(
    basis: &OrthoBasis,
    mu: &DiscreteMeasure,
    target: &[Complex64],
    coeffs: &[Complex64],
    norm: Norm,
) -> f64 {
    let r: Vec<Complex64> = par::map_indexed(mu.len(), |i| {
        let mut acc = target[i];
        for (c, q) in coeffs.iter().zip(basis.samples()) {
            acc -= c * q[i];
        }
        acc
    });
    fit::lp_residual(mu.weights(), &r, norm)
}

/// Orthogonal projection of `target` onto span{1, z, …, z^degree} in L²(μ),
/// with the exact projection residual.
pub fn best_approx_l2(
    mu: &DiscreteMeasure,
    target: &SampledFunction,
    degree: usize,
) -> Result<ApproxResult> {
    mu.ensure_bound(target)?;
    let basis = Arc::new(build_ortho_basis(mu, degree)?);
    let coeffs = projection_coeffs(&basis, mu, target.values());
    let residual = direct_residual(&basis, mu, target.values(), &coeffs, Norm::P(2.0));
    Ok(ApproxResult {
        poly: Polynomial::adapted(basis, coeffs)?,
        residual,
        converged: true,
    })
}

/// Best Lᵖ(μ) fit of degree ≤ `degree` by iteratively reweighted least
/// squares. At p = 2 this coincides with [`best_approx_l2`].
pub fn best_approx_lp(
    mu: &DiscreteMeasure,
    target: &SampledFunction,
    degree: usize,
    p: f64,
) -> Result<ApproxResult> {
    mu.ensure_bound(target)?;
    if !(p.is_finite() && p > 0.0) {
        return Err(CoreError::InvalidExponent(p));
    }
    let basis = Arc::new(build_ortho_basis(mu, degree)?);
    let out = fit::irls_lp(
        basis.samples(),
        mu.weights(),
        target.values(),
        p,
        None,
        fit::IRLS_MAX_ITER,
    );
    Ok(ApproxResult {
        poly: Polynomial::adapted(basis, out.coeffs)?,
        residual: out.residual,
        converged: out.converged,
    })
}

/// Sup-norm fit on the atom set of `points` by Lawson's iteration. Weights of
/// `points` only condition the internal basis; the residual is the plain max
/// pointwise error of the returned polynomial (a certified upper bound).
pub fn best_approx_sup(
    points: &DiscreteMeasure,
    target: &SampledFunction,
    degree: usize,
) -> Result<ApproxResult> {
    points.ensure_bound(target)?;
    let basis = Arc::new(build_ortho_basis(points, degree)?);
    let out = fit::lawson_sup(
        basis.samples(),
        target.values(),
        fit::LAWSON_MAX_ITER,
        fit::LAWSON_REL_TOL,
        None,
    );
    Ok(ApproxResult {
        poly: Polynomial::adapted(basis, out.coeffs)?,
        residual: out.residual,
        converged: out.converged,
    })
}

/// Residual curve degree ↦ dist(target, {p·weight : deg p ≤ degree}) in the
/// requested norm. Without a weight the approximants are plain polynomials.
///
/// The weight may vanish at atoms (the approximants then vanish there too);
/// it is the weighted span that matters. Residuals are nonincreasing along
/// ascending degrees; for the iterative norms this is enforced by carrying
/// the best earlier fit forward, which is admissible since the spans are
/// nested.
pub fn density_profile(
    mu: &DiscreteMeasure,
    target: &SampledFunction,
    norm: Norm,
    degrees: &[usize],
    weight: Option<&SampledFunction>,
) -> Result<Vec<ProfilePoint>> {
    mu.ensure_bound(target)?;
    if let Some(w) = weight {
        mu.ensure_bound(w)?;
    }
    if degrees.is_empty() {
        return Ok(Vec::new());
    }

    let max_degree = *degrees.iter().max().unwrap();
    let coords: Vec<Complex64> = mu.points().to_vec();
    let basis = match weight {
        Some(w) => build_weighted(mu, &coords, w, max_degree)?,
        None => build_ortho_basis(mu, max_degree)?,
    };

    let mut sorted: Vec<usize> = degrees.to_vec();
    sorted.sort_unstable();
    sorted.dedup();

    let computed: Vec<(usize, f64, bool)> = match norm {
        Norm::P(p) if (p - 2.0).abs() < 1e-15 => l2_profile(&basis, mu, target.values(), &sorted),
        Norm::P(p) => lp_profile(&basis, mu, target.values(), &sorted, p),
        Norm::Sup => sup_profile(&basis, target.values(), &sorted),
    };

    let lookup: std::collections::HashMap<usize, (f64, bool)> =
        computed.iter().map(|&(d, r, c)| (d, (r, c))).collect();
    Ok(degrees
        .iter()
        .map(|&d| {
            let (residual, converged) = lookup[&d];
            ProfilePoint {
                degree: d,
                residual,
                converged,
            }
        })
        .collect())
}

fn l2_profile(
    basis: &OrthoBasis,
    mu: &DiscreteMeasure,
    target: &[Complex64],
    sorted: &[usize],
) -> Vec<(usize, f64, bool)> {
    let coeffs = projection_coeffs(basis, mu, target);
    let n = mu.len();
    let mut approx = vec![Complex64::new(0.0, 0.0); n];
    let mut next_member = 0usize;
    let mut out = Vec::with_capacity(sorted.len());
    for &d in sorted {
        let upto = (d + 1).min(basis.rank());
        while next_member < upto {
            let q = basis.sampled(next_member);
            let c = coeffs[next_member];
            for i in 0..n {
                approx[i] += c * q[i];
            }
            next_member += 1;
        }
        let r: Vec<Complex64> = (0..n).map(|i| target[i] - approx[i]).collect();
        out.push((d, fit::lp_residual(mu.weights(), &r, Norm::P(2.0)), true));
    }
    out
}

fn lp_profile(
    basis: &OrthoBasis,
    mu: &DiscreteMeasure,
    target: &[Complex64],
    sorted: &[usize],
    p: f64,
) -> Vec<(usize, f64, bool)> {
    let mut out = Vec::with_capacity(sorted.len());
    let mut warm: Option<Vec<Complex64>> = None;
    let mut best_so_far = f64::INFINITY;
    for &d in sorted {
        let upto = (d + 1).min(basis.rank());
        let cols = &basis.samples()[..upto];
        let outcome = fit::irls_lp(
            cols,
            mu.weights(),
            target,
            p,
            warm.as_deref(),
            fit::IRLS_MAX_ITER,
        );
        best_so_far = best_so_far.min(outcome.residual);
        warm = Some(outcome.coeffs);
        out.push((d, best_so_far, outcome.converged));
    }
    out
}

fn sup_profile(
    basis: &OrthoBasis,
    target: &[Complex64],
    sorted: &[usize],
) -> Vec<(usize, f64, bool)> {
    let fits: Vec<(f64, bool)> = par::map_slice(sorted, |&d| {
        let upto = (d + 1).min(basis.rank());
        let cols = &basis.samples()[..upto];
        let out = fit::lawson_sup(
            cols,
            target,
            fit::LAWSON_MAX_ITER,
            fit::LAWSON_REL_TOL,
            None,
        );
        (out.residual, out.converged)
    });
    let mut best = f64::INFINITY;
    sorted
        .iter()
        .zip(fits)
        .map(|(&d, (r, c))| {
            best = best.min(r);
            (d, best, c)
        })
        .collect()
}
