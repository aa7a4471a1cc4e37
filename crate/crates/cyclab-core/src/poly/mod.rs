//! Polynomials, measure-adapted orthonormal bases, and best approximation in
//! L²(μ), Lᵖ(μ), and the sup norm, plus residual-vs-degree density profiles.

mod approx;
mod basis;

pub use approx::{
    best_approx_l2, best_approx_lp, best_approx_sup, density_profile, ApproxResult, ProfilePoint,
};
pub(crate) use basis::build_weighted;
pub use basis::{build_ortho_basis, build_ortho_basis_in, OrthoBasis};

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{CoreError, Result};

/// Basis a polynomial's coefficients refer to.
#[derive(Debug, Clone)]
pub enum PolyBasis {
    /// Plain powers of the variable.
    Monomial,
    /// Orthonormal family adapted to a measure; see [`OrthoBasis`].
    Adapted(Arc<OrthoBasis>),
}

/// A polynomial in one complex variable (z, or φ for adapted bases built on
/// another multiplier).
#[derive(Debug, Clone)]
pub struct Polynomial {
    basis: PolyBasis,
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn monomial(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs
            .iter()
            .any(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(CoreError::InvalidInput(
                "polynomial coefficients must be finite".into(),
            ));
        }
        Ok(Polynomial {
            basis: PolyBasis::Monomial,
            coeffs,
        })
    }

    pub fn adapted(basis: Arc<OrthoBasis>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() > basis.rank() {
            return Err(CoreError::InvalidInput(format!(
                "{} coefficients refer to a basis of rank {}",
                coeffs.len(),
                basis.rank()
            )));
        }
        if coeffs
            .iter()
            .any(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(CoreError::InvalidInput(
                "polynomial coefficients must be finite".into(),
            ));
        }
        Ok(Polynomial {
            basis: PolyBasis::Adapted(basis),
            coeffs,
        })
    }

    pub fn zero() -> Self {
        Polynomial {
            basis: PolyBasis::Monomial,
            coeffs: Vec::new(),
        }
    }

    pub fn one() -> Self {
        Polynomial {
            basis: PolyBasis::Monomial,
            coeffs: vec![Complex64::new(1.0, 0.0)],
        }
    }

    /// x as a monomial polynomial.
    pub fn identity() -> Self {
        Polynomial {
            basis: PolyBasis::Monomial,
            coeffs: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn basis(&self) -> &PolyBasis {
        &self.basis
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match &self.basis {
            PolyBasis::Monomial => horner(&self.coeffs, z),
            PolyBasis::Adapted(basis) => {
                let factors = basis.eval_factors(z, self.coeffs.len());
                self.coeffs.iter().zip(&factors).map(|(c, f)| c * f).sum()
            }
        }
    }

    pub fn eval_many(&self, points: &[Complex64]) -> Vec<Complex64> {
        points.iter().map(|&z| self.eval(z)).collect()
    }

    /// Convert to monomial coefficients. For adapted bases this uses the
    /// stored expansion; past degree ~30 on general measures the expansion
    /// coefficients can be huge even when the basis itself is tame, so prefer
    /// adapted evaluation when possible.
    pub fn to_monomial(&self) -> Polynomial {
        match &self.basis {
            PolyBasis::Monomial => self.clone(),
            PolyBasis::Adapted(basis) => {
                let mut out: Vec<Complex64> = Vec::new();
                for (k, c) in self.coeffs.iter().enumerate() {
                    for (j, m) in basis.monomial_coeffs(k).iter().enumerate() {
                        if j >= out.len() {
                            out.resize(j + 1, Complex64::new(0.0, 0.0));
                        }
                        out[j] += c * m;
                    }
                }
                Polynomial {
                    basis: PolyBasis::Monomial,
                    coeffs: out,
                }
            }
        }
    }

    /// Product, in monomial representation.
    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let a = self.to_monomial();
        let b = other.to_monomial();
        if a.coeffs.is_empty() || b.coeffs.is_empty() {
            return Polynomial::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); a.coeffs.len() + b.coeffs.len() - 1];
        for (i, &ca) in a.coeffs.iter().enumerate() {
            for (j, &cb) in b.coeffs.iter().enumerate() {
                out[i + j] += ca * cb;
            }
        }
        Polynomial {
            basis: PolyBasis::Monomial,
            coeffs: out,
        }
    }
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// A polynomial in z and z̄ with finitely many nonzero terms, keyed by the
/// exponent pair (j, m) of zʲ z̄ᵐ.
#[derive(Debug, Clone, Default)]
pub struct BiPolynomial {
    terms: BTreeMap<(u32, u32), Complex64>,
}

impl BiPolynomial {
    pub fn new<I: IntoIterator<Item = ((u32, u32), Complex64)>>(terms: I) -> Self {
        let mut map = BTreeMap::new();
        for (k, c) in terms {
            if c.norm() > 0.0 {
                *map.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c;
            }
        }
        map.retain(|_, c| c.norm() > 0.0);
        BiPolynomial { terms: map }
    }

    /// The single term zʲ z̄ᵐ.
    pub fn term(j: u32, m: u32) -> Self {
        Self::new([((j, m), Complex64::new(1.0, 0.0))])
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Complex64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest z̄-exponent appearing.
    pub fn conj_degree(&self) -> u32 {
        self.terms.keys().map(|&(_, m)| m).max().unwrap_or(0)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let zc = z.conj();
        self.terms
            .iter()
            .map(|(&(j, m), &c)| c * z.powu(j) * zc.powu(m))
            .sum()
    }

    /// Group terms by z̄-exponent: returns (m, polynomial-in-z) pairs in
    /// increasing m.
    pub fn by_conj_power(&self) -> Vec<(u32, Polynomial)> {
        let mut grouped: BTreeMap<u32, Vec<Complex64>> = BTreeMap::new();
        for (&(j, m), &c) in &self.terms {
            let v = grouped.entry(m).or_default();
            if v.len() <= j as usize {
                v.resize(j as usize + 1, Complex64::new(0.0, 0.0));
            }
            v[j as usize] += c;
        }
        grouped
            .into_iter()
            .map(|(m, coeffs)| {
                (
                    m,
                    Polynomial {
                        basis: PolyBasis::Monomial,
                        coeffs,
                    },
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn monomial_eval_horner() {
        let p = Polynomial::monomial(vec![c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]).unwrap();
        assert_eq!(p.eval(c(2.0, 0.0)), c(9.0, 0.0));
        assert_eq!(p.degree(), 2);
        assert_eq!(Polynomial::zero().eval(c(5.0, 1.0)), c(0.0, 0.0));
    }

    #[test]
    fn polynomial_product() {
        let p = Polynomial::monomial(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap(); // 1 + z
        let q = p.mul(&p); // 1 + 2z + z²
        assert_eq!(q.coeffs().len(), 3);
        assert_eq!(q.eval(c(3.0, 0.0)), c(16.0, 0.0));
    }

    #[test]
    fn bipolynomial_eval_and_grouping() {
        // z z̄² + 2
        let b = BiPolynomial::new([((1, 2), c(1.0, 0.0)), ((0, 0), c(2.0, 0.0))]);
        let z = c(1.0, 1.0);
        let expect = z * z.conj().powu(2) + 2.0;
        assert!((b.eval(z) - expect).norm() < 1e-15);
        assert_eq!(b.conj_degree(), 2);
        let groups = b.by_conj_power();
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].0, 0);
        assert_eq!(groups[1].0, 2);
    }

    #[test]
    fn bipolynomial_prunes_zero_terms() {
        let b = BiPolynomial::new([((1, 1), c(1.0, 0.0)), ((1, 1), c(-1.0, 0.0))]);
        assert!(b.is_zero());
    }

    #[test]
    fn rejects_nonfinite_coeffs() {
        assert!(Polynomial::monomial(vec![c(f64::NAN, 0.0)]).is_err());
    }
}
