//! Measure-adapted orthonormal polynomial families.
//!
//! Raw monomial normal equations are numerically useless beyond degree ~20,
//! so bases are built by an Arnoldi-style recurrence: repeatedly multiply the
//! last member by the variable, orthogonalize against all previous members
//! (twice), and normalize — all with respect to the measure's inner product.
//! The recurrence coefficients are kept so members can be evaluated stably at
//! arbitrary points; a monomial expansion is carried along for interop.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::measure::{DiscreteMeasure, MeasureId, SampledFunction};
use crate::par;

const RANK_TOL: f64 = 1e-13;

/// Orthonormal family q₀, …, q_r with respect to L²(μ).
///
/// In the default construction qₖ = pₖ(z) with pₖ a degree-k polynomial. When
/// built with a multiplier φ the variable is φ instead of z, and when built
/// from an initial vector h the members are qₖ = pₖ(z)·h, which span
/// {h, zh, …, z^r h}. Only the polynomial factors pₖ can be evaluated away
/// from the atoms.
#[derive(Debug)]
pub struct OrthoBasis {
    measure_id: MeasureId,
    n_atoms: usize,
    samples: Vec<Vec<Complex64>>,
    /// hess[k] has length k+2: z·qₖ = Σ_{j≤k} hess[k][j]·qⱼ + hess[k][k+1]·q_{k+1}.
    hess: Vec<Vec<Complex64>>,
    /// Monomial expansion of the polynomial factor pₖ.
    monomial: Vec<Vec<Complex64>>,
    rank_deficient: bool,
}

impl OrthoBasis {
    /// Number of orthonormal members (achieved rank).
    pub fn rank(&self) -> usize {
        self.samples.len()
    }

    /// Degree of the last polynomial factor.
    pub fn degree(&self) -> usize {
        self.rank().saturating_sub(1)
    }

    /// True when orthonormalization stopped before the requested degree
    /// because the powers became linearly dependent on the support.
    pub fn is_rank_deficient(&self) -> bool {
        self.rank_deficient
    }

    pub fn measure_id(&self) -> MeasureId {
        self.measure_id
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    /// Per-atom samples of qₖ.
    pub fn sampled(&self, k: usize) -> &[Complex64] {
        &self.samples[k]
    }

    pub fn samples(&self) -> &[Vec<Complex64>] {
        &self.samples
    }

    /// Monomial coefficients of the polynomial factor pₖ.
    pub fn monomial_coeffs(&self, k: usize) -> &[Complex64] {
        &self.monomial[k]
    }

    /// Evaluate the polynomial factors p₀(x), …, p_{count−1}(x) by the stored
    /// recurrence.
    pub fn eval_factors(&self, x: Complex64, count: usize) -> Vec<Complex64> {
        let count = count.min(self.rank());
        let mut vals: Vec<Complex64> = Vec::with_capacity(count);
        if count == 0 {
            return vals;
        }
        vals.push(self.monomial[0][0]);
        for k in 0..count.saturating_sub(1) {
            let h = &self.hess[k];
            let mut next = x * vals[k];
            for (j, vj) in vals.iter().enumerate() {
                next -= h[j] * vj;
            }
            vals.push(next / h[k + 1]);
        }
        vals
    }

    /// Max-entry deviation of the Gram matrix from the identity.
    pub fn gram_defect(&self, mu: &DiscreteMeasure) -> f64 {
        let w = mu.weights();
        let mut worst = 0.0f64;
        for a in 0..self.rank() {
            for b in 0..=a {
                let g = par::inner(w, &self.samples[a], &self.samples[b]);
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }
}

/// Orthonormal polynomials of the coordinate z up to `degree`.
///
/// Needs degree + 1 ≤ number of atoms for full rank; otherwise the powers are
/// dependent on the support and the returned basis stops at the achieved rank
/// with [`OrthoBasis::is_rank_deficient`] set.
pub fn build_ortho_basis(mu: &DiscreteMeasure, degree: usize) -> Result<OrthoBasis> {
    build(mu, mu.coordinate().values(), None, degree)
}

/// Orthonormal polynomials in an arbitrary multiplier (e.g. φ for graph
/// cyclicity), spanning {1, φ, …, φ^degree} on the atoms.
pub fn build_ortho_basis_in(
    mu: &DiscreteMeasure,
    multiplier: &SampledFunction,
    degree: usize,
) -> Result<OrthoBasis> {
    mu.ensure_bound(multiplier)?;
    build(mu, multiplier.values(), None, degree)
}

/// Orthonormal basis of the weighted span {h, m·h, …, m^degree·h}.
pub(crate) fn build_weighted(
    mu: &DiscreteMeasure,
    multiplier: &[Complex64],
    initial: &SampledFunction,
    degree: usize,
) -> Result<OrthoBasis> {
    mu.ensure_bound(initial)?;
    build(mu, multiplier, Some(initial.values()), degree)
}

fn build(
    mu: &DiscreteMeasure,
    multiplier: &[Complex64],
    initial: Option<&[Complex64]>,
    degree: usize,
) -> Result<OrthoBasis> {
    let n = mu.len();
    let w = mu.weights();
    let ones = vec![Complex64::new(1.0, 0.0); n];
    let v0 = initial.unwrap_or(&ones);

    let norm0 = par::norm_sq(w, v0).sqrt();
    if norm0.is_nan() || norm0 <= 0.0 {
        return Err(CoreError::InvalidInput(
            "initial vector has zero norm in L²(μ)".into(),
        ));
    }
    let inv0 = 1.0 / norm0;
    let q0: Vec<Complex64> = v0.iter().map(|&v| v * inv0).collect();

    let mut samples = vec![q0];
    let mut hess: Vec<Vec<Complex64>> = Vec::new();
    let mut monomial: Vec<Vec<Complex64>> = vec![vec![Complex64::new(inv0, 0.0)]];
    let mut rank_deficient = false;

    for k in 0..degree {
        let mut v: Vec<Complex64> = samples[k]
            .iter()
            .zip(multiplier)
            .map(|(&q, &m)| q * m)
            .collect();
        let scale = par::norm_sq(w, &v).sqrt();
        let mut h = vec![Complex64::new(0.0, 0.0); k + 2];
        for _pass in 0..2 {
            for (j, qj) in samples.iter().enumerate() {
                let hij = par::inner(w, &v, qj);
                for (vi, qi) in v.iter_mut().zip(qj) {
                    *vi -= hij * qi;
                }
                h[j] += hij;
            }
        }
        let beta = par::norm_sq(w, &v).sqrt();
        if beta.is_nan() || beta <= RANK_TOL * scale.max(f64::MIN_POSITIVE) {
            rank_deficient = true;
            break;
        }
        h[k + 1] = beta.into();
        let inv = 1.0 / beta;
        for vi in v.iter_mut() {
            *vi *= inv;
        }

        // Same recurrence on the monomial expansion of the factors.
        let mut next = vec![Complex64::new(0.0, 0.0); monomial[k].len() + 1];
        for (j, &c) in monomial[k].iter().enumerate() {
            next[j + 1] = c;
        }
        for (j, mono_j) in monomial.iter().enumerate() {
            for (i, &c) in mono_j.iter().enumerate() {
                next[i] -= h[j] * c;
            }
        }
        for c in next.iter_mut() {
            *c *= inv;
        }

        samples.push(v);
        hess.push(h);
        monomial.push(next);
    }

    Ok(OrthoBasis {
        measure_id: mu.id(),
        n_atoms: n,
        samples,
        hess,
        monomial,
        rank_deficient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_point_basis_by_hand() {
        // μ uniform on {−1, 1}: Gram–Schmidt gives q₀ = 1, q₁ = z.
        let mu = DiscreteMeasure::new(vec![(c(-1.0, 0.0), 0.5), (c(1.0, 0.0), 0.5)]).unwrap();
        let basis = build_ortho_basis(&mu, 1).unwrap();
        assert_eq!(basis.rank(), 2);
        assert!((basis.sampled(0)[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((basis.sampled(1)[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((basis.sampled(1)[1] - c(1.0, 0.0)).norm() < 1e-14);
        // monomial factors: p0 = 1, p1 = z
        assert!((basis.monomial_coeffs(0)[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((basis.monomial_coeffs(1)[0]).norm() < 1e-14);
        assert!((basis.monomial_coeffs(1)[1] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn degree_zero_is_constant_one_on_probability_measure() {
        let mu = DiscreteMeasure::new(vec![
            (c(0.3, 0.1), 0.25),
            (c(-1.0, 2.0), 0.5),
            (c(4.0, 0.0), 0.25),
        ])
        .unwrap();
        let basis = build_ortho_basis(&mu, 0).unwrap();
        assert_eq!(basis.rank(), 1);
        for v in basis.sampled(0) {
            assert!((v - c(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn gram_identity_on_random_measure() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let atoms: Vec<(Complex64, f64)> = (0..200)
            .map(|_| {
                (
                    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    rng.gen_range(0.1..1.0),
                )
            })
            .collect();
        let mu = DiscreteMeasure::new(atoms).unwrap();
        let basis = build_ortho_basis(&mu, 25).unwrap();
        assert_eq!(basis.rank(), 26);
        assert!(!basis.is_rank_deficient());
        assert!(basis.gram_defect(&mu) < 1e-10);
    }

    #[test]
    fn rank_stops_at_atom_count() {
        let mu = DiscreteMeasure::new(vec![
            (c(0.0, 0.0), 1.0),
            (c(1.0, 0.0), 1.0),
            (c(2.0, 0.0), 1.0),
        ])
        .unwrap();
        let basis = build_ortho_basis(&mu, 10).unwrap();
        assert_eq!(basis.rank(), 3);
        assert!(basis.is_rank_deficient());
    }

    #[test]
    fn recurrence_eval_matches_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let atoms: Vec<(Complex64, f64)> = (0..40)
            .map(|_| {
                (
                    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    rng.gen_range(0.5..1.5),
                )
            })
            .collect();
        let mu = DiscreteMeasure::new(atoms).unwrap();
        let basis = build_ortho_basis(&mu, 12).unwrap();
        for (i, &z) in mu.points().iter().enumerate().step_by(7) {
            let vals = basis.eval_factors(z, basis.rank());
            for k in 0..basis.rank() {
                assert!(
                    (vals[k] - basis.sampled(k)[i]).norm() < 1e-9,
                    "factor {k} mismatch at atom {i}"
                );
            }
        }
    }

    #[test]
    fn weighted_basis_spans_multiples_of_initial() {
        let mu = DiscreteMeasure::new(vec![
            (c(0.0, 0.0), 0.5),
            (c(1.0, 0.0), 0.25),
            (c(2.0, 0.0), 0.25),
        ])
        .unwrap();
        let h = mu
            .sample_values(vec![c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)])
            .unwrap();
        let coords: Vec<Complex64> = mu.points().to_vec();
        let basis = build_weighted(&mu, &coords, &h, 4).unwrap();
        // h vanishes at one atom, so the span has dimension 2, not 5.
        assert_eq!(basis.rank(), 2);
        assert!(basis.is_rank_deficient());
        for q in basis.samples() {
            assert!(q[1].norm() < 1e-14);
        }
    }
}
