//! Measure generators: quadrature discretizations of the standard example
//! measures (disc area, circle arc length, real segment, the logarithmic
//! spiral) and seeded random atom clouds.
//!
//! Quadrature conventions: midpoint rule with cell-area weights for the disc,
//! trapezoid for the 1-D spiral, endpoint-inclusive equal weights on the
//! segment, uniform arc weights on the circle.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::measure::DiscreteMeasure;

/// Midpoint quadrature of the area measure on the open unit disc: cells of
/// side `step` tile [−1, 1]², centers strictly inside the disc carry weight
/// step². Total mass ≈ π (set `normalized` to rescale to a probability
/// measure).
pub fn disc_quadrature(step: f64, normalized: bool) -> Result<DiscreteMeasure> {
    if !(step.is_finite() && step > 0.0 && step < 2.0) {
        return Err(CoreError::InvalidInput(format!("bad disc step {step}")));
    }
    let n = (2.0 / step).ceil() as i64;
    let mut atoms = Vec::new();
    for iy in 0..n {
        for ix in 0..n {
            let x = -1.0 + (ix as f64 + 0.5) * step;
            let y = -1.0 + (iy as f64 + 0.5) * step;
            if x * x + y * y < 1.0 {
                atoms.push((Complex64::new(x, y), step * step));
            }
        }
    }
    if normalized {
        let mass: f64 = atoms.iter().map(|a| a.1).sum();
        for a in atoms.iter_mut() {
            a.1 /= mass;
        }
    }
    DiscreteMeasure::new(atoms)
}

/// Uniform nodes of normalized arc length on |z| = 1.
pub fn circle_nodes(n: usize) -> Result<DiscreteMeasure> {
    if n == 0 {
        return Err(CoreError::InvalidInput(
            "circle needs at least one node".into(),
        ));
    }
    DiscreteMeasure::new(
        (0..n)
            .map(|j| {
                let th = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                (Complex64::from_polar(1.0, th), 1.0 / n as f64)
            })
            .collect(),
    )
}

/// Endpoint-inclusive uniform nodes on the real segment [a, b], equal weights.
pub fn segment_nodes(a: f64, b: f64, n: usize) -> Result<DiscreteMeasure> {
    if n < 2 || !(a.is_finite() && b.is_finite() && a < b) {
        return Err(CoreError::InvalidInput(format!(
            "bad segment [{a}, {b}] with {n} nodes"
        )));
    }
    DiscreteMeasure::new(
        (0..n)
            .map(|i| {
                let t = a + (b - a) * i as f64 / (n - 1) as f64;
                (Complex64::new(t, 0.0), 1.0 / n as f64)
            })
            .collect(),
    )
}

/// Trapezoid quadrature of arc length on the spiral e^{(1+i)t}, t ∈ [t0, t1]:
/// |γ'(t)| = √2·eᵗ.
pub fn spiral_nodes(t0: f64, t1: f64, n: usize) -> Result<DiscreteMeasure> {
    if n < 2 || !(t0.is_finite() && t1.is_finite() && t0 < t1) {
        return Err(CoreError::InvalidInput(format!(
            "bad spiral range [{t0}, {t1}] with {n} nodes"
        )));
    }
    let dt = (t1 - t0) / (n - 1) as f64;
    DiscreteMeasure::new(
        (0..n)
            .map(|i| {
                let t = t0 + dt * i as f64;
                let z = (Complex64::new(1.0, 1.0) * t).exp();
                let endpoint = i == 0 || i + 1 == n;
                let w = 2f64.sqrt() * t.exp() * dt * if endpoint { 0.5 } else { 1.0 };
                (z, w)
            })
            .collect(),
    )
}

/// Seeded uniform atoms in the axis-aligned box, equal weights 1/n.
pub fn random_box(n: usize, re: (f64, f64), im: (f64, f64), seed: u64) -> Result<DiscreteMeasure> {
    if n == 0 || !(re.0 < re.1 && im.0 < im.1) {
        return Err(CoreError::InvalidInput("bad random-box parameters".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DiscreteMeasure::new(
        (0..n)
            .map(|_| {
                (
                    Complex64::new(rng.gen_range(re.0..re.1), rng.gen_range(im.0..im.1)),
                    1.0 / n as f64,
                )
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_disc_mass_near_pi() {
        // step ½ tiles [−1,1]² with 4 cells per side; the retained centers
        // carry total mass within 25% of π.
        let mu = disc_quadrature(0.5, false).unwrap();
        let mass = mu.total_mass();
        assert!((mass - std::f64::consts::PI).abs() < 0.25 * std::f64::consts::PI);
        assert!(mu.points().iter().all(|z| z.norm() < 1.0));
    }

    #[test]
    fn four_circle_nodes_at_unit_roots() {
        let mu = circle_nodes(4).unwrap();
        assert_eq!(mu.len(), 4);
        let pts = mu.points();
        assert!((pts[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((pts[1] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((pts[2] - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((pts[3] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!(mu.weights().iter().all(|&w| (w - 0.25).abs() < 1e-15));
    }

    #[test]
    fn three_segment_nodes() {
        let mu = segment_nodes(0.0, 1.0, 3).unwrap();
        let pts: Vec<f64> = mu.points().iter().map(|z| z.re).collect();
        assert_eq!(pts, vec![0.0, 0.5, 1.0]);
        assert!(mu.weights().iter().all(|&w| (w - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn spiral_arc_length_matches_integral() {
        // ∫√2 eᵗ dt over [−2, 1] = √2(e − e^{−2})
        let mu = spiral_nodes(-2.0, 1.0, 4000).unwrap();
        let expect = 2f64.sqrt() * (1f64.exp() - (-2f64).exp());
        assert!((mu.total_mass() - expect).abs() < 1e-4 * expect);
    }

    #[test]
    fn random_box_is_seed_deterministic() {
        let a = random_box(50, (-1.0, 1.0), (-1.0, 1.0), 9).unwrap();
        let b = random_box(50, (-1.0, 1.0), (-1.0, 1.0), 9).unwrap();
        assert_eq!(a.points(), b.points());
        let c = random_box(50, (-1.0, 1.0), (-1.0, 1.0), 10).unwrap();
        assert_ne!(a.points(), c.points());
    }

    #[test]
    fn generator_parameter_validation() {
        assert!(disc_quadrature(0.0, false).is_err());
        assert!(circle_nodes(0).is_err());
        assert!(segment_nodes(1.0, 0.0, 5).is_err());
        assert!(spiral_nodes(0.0, 0.0, 5).is_err());
        assert!(random_box(0, (0.0, 1.0), (0.0, 1.0), 1).is_err());
    }
}
