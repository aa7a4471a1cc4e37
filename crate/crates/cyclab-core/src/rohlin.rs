//! Rohlin layer decomposition of (φ, μ) for discrete measure spaces, local
//! multiplicity, and the constructive side of the multiplicity equalities:
//! a cyclic set of size mp plus an exact insufficiency bound for fewer
//! generators.
//!
//! Fibers are the preimages of the pushforward values. Within each fiber the
//! atoms are ranked by descending weight (ties by index); the k-th heaviest
//! atom of every fiber feeds layer k, which nests the layer supports by
//! construction. The continuous part of the decomposition is structurally
//! absent for atomic inputs and carried only so reports mirror the full
//! trichotomy.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::fit;
use crate::measure::{pushforward_with_assignment, DiscreteMeasure, SampledFunction, MERGE_TOL};
use crate::par;

/// Preimage structure of a sampled map: one fiber per distinct value.
#[derive(Debug, Clone)]
pub struct FiberMap {
    /// Distinct values, ordered by first occurrence.
    pub values: Vec<Complex64>,
    /// Atom indices per fiber, sorted by descending weight then index.
    pub fibers: Vec<Vec<usize>>,
    /// atom index → fiber index
    pub assignment: Vec<usize>,
}

/// Group atoms into fibers of φ; values merge within `tol` as in
/// [`crate::measure::pushforward`].
pub fn fiber_map(mu: &DiscreteMeasure, phi: &SampledFunction, tol: f64) -> Result<FiberMap> {
    let (push, assignment) = pushforward_with_assignment(mu, phi, tol)?;
    let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); push.len()];
    for (atom, &f) in assignment.iter().enumerate() {
        fibers[f].push(atom);
    }
    let w = mu.weights();
    for fiber in fibers.iter_mut() {
        fiber.sort_by(|&a, &b| w[b].partial_cmp(&w[a]).unwrap().then(a.cmp(&b)));
    }
    Ok(FiberMap {
        values: push.points().to_vec(),
        fibers,
        assignment,
    })
}

/// Ordered layer measures μ₁ ≫ μ₂ ≫ … over the value space.
#[derive(Debug, Clone)]
pub struct RohlinLayers {
    pub layers: Vec<DiscreteMeasure>,
    /// atom index → layer index (0-based: rank within its fiber)
    pub layer_of_atom: Vec<usize>,
    pub fiber_map: FiberMap,
    /// Always None for discrete inputs; kept so reports mirror the
    /// continuous ⊕ atomic trichotomy.
    pub continuous_part: Option<DiscreteMeasure>,
}

impl RohlinLayers {
    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }
}

/// Decompose (φ, μ): the k-th heaviest atom of each fiber contributes its
/// weight to layer k at the fiber's value. Layer supports nest and the layer
/// sum reconstructs the pushforward exactly.
pub fn rohlin_decompose(
    mu: &DiscreteMeasure,
    phi: &SampledFunction,
    tol: f64,
) -> Result<RohlinLayers> {
    let fm = fiber_map(mu, phi, tol)?;
    let max_fiber = fm.fibers.iter().map(Vec::len).max().unwrap_or(0);
    let mut layer_of_atom = vec![0usize; mu.len()];
    let mut layers = Vec::with_capacity(max_fiber);
    for k in 0..max_fiber {
        let mut atoms = Vec::new();
        for (f, fiber) in fm.fibers.iter().enumerate() {
            if let Some(&atom) = fiber.get(k) {
                layer_of_atom[atom] = k;
                atoms.push((fm.values[f], mu.weights()[atom]));
            }
        }
        layers.push(DiscreteMeasure::new(atoms)?);
    }
    Ok(RohlinLayers {
        layers,
        layer_of_atom,
        fiber_map: fm,
        continuous_part: None,
    })
}

/// Local multiplicity table: m_φ(z) = fiber cardinality, mp = max. For
/// discrete spaces the a.e.-exceptional set is empty and the raw preimage
/// count is the local multiplicity.
#[derive(Debug, Clone)]
pub struct MultiplicityReport {
    /// (value, m_φ(value)) ordered by first occurrence.
    pub local: Vec<(Complex64, usize)>,
    pub mp: usize,
    /// Mass of the continuous part: structurally 0 here. Infinite
    /// multiplicity (μ_c ≠ 0 or unbounded fiber counts) is outside the
    /// representable range of atomic inputs.
    pub continuous_mass: f64,
}

pub fn local_multiplicity(
    mu: &DiscreteMeasure,
    phi: &SampledFunction,
    tol: f64,
) -> Result<MultiplicityReport> {
    let fm = fiber_map(mu, phi, tol)?;
    let local: Vec<(Complex64, usize)> = fm
        .values
        .iter()
        .zip(&fm.fibers)
        .map(|(&v, f)| (v, f.len()))
        .collect();
    let mp = local.iter().map(|&(_, m)| m).max().unwrap_or(0);
    Ok(MultiplicityReport {
        local,
        mp,
        continuous_mass: 0.0,
    })
}

/// The canonical cyclic set of size mp: f_k = (indicator of layer-k atoms) ·
/// e^{−2|φ|}, the cyclic weight evaluated on the pushforward atoms (all layer
/// supports are finite here so the default weight applies).
pub fn build_cyclic_set(
    mu: &DiscreteMeasure,
    phi: &SampledFunction,
    layers: &RohlinLayers,
) -> Result<Vec<SampledFunction>> {
    mu.ensure_bound(phi)?;
    if layers.layer_of_atom.len() != mu.len() {
        return Err(CoreError::BindingMismatch {
            expected: layers.layer_of_atom.len(),
            got: mu.len(),
        });
    }
    let mut set = Vec::with_capacity(layers.n_layers());
    for k in 0..layers.n_layers() {
        let values: Vec<Complex64> = (0..mu.len())
            .map(|i| {
                if layers.layer_of_atom[i] == k {
                    Complex64::new((-2.0 * phi.values()[i].norm()).exp(), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        set.push(mu.sample_values(values)?);
    }
    Ok(set)
}

/// Verification that polynomials in φ applied to the set reach every atom
/// indicator: within layer k the reachable space from f_k has one dimension
/// per fiber value, so exact interpolation lands at degree (layer support
/// size − 1).
#[derive(Debug, Clone)]
pub struct CyclicSetCheck {
    pub max_residual: f64,
    pub degree_needed: usize,
}

pub fn verify_cyclic_set(
    mu: &DiscreteMeasure,
    phi: &SampledFunction,
    layers: &RohlinLayers,
    set: &[SampledFunction],
) -> Result<CyclicSetCheck> {
    mu.ensure_bound(phi)?;
    if set.len() != layers.n_layers() {
        return Err(CoreError::InvalidInput(format!(
            "cyclic set of size {} against {} layers",
            set.len(),
            layers.n_layers()
        )));
    }
    let w = mu.weights();
    let mut max_residual = 0.0f64;
    let mut degree_needed = 0usize;
    for (k, f_k) in set.iter().enumerate() {
        let atoms: Vec<usize> = (0..mu.len())
            .filter(|&i| layers.layer_of_atom[i] == k)
            .collect();
        if atoms.is_empty() {
            continue;
        }
        let s = atoms.len();
        degree_needed = degree_needed.max(s - 1);
        // Orthonormal basis of span{f_k, φ·f_k, …, φ^{s−1}·f_k} on the layer,
        // built by the Arnoldi recurrence (raw power columns are numerically
        // dependent long before s ~ 100).
        let sub = DiscreteMeasure::new(atoms.iter().map(|&i| (mu.points()[i], w[i])).collect())?;
        let sub_phi: Vec<Complex64> = atoms.iter().map(|&i| phi.values()[i]).collect();
        let initial = sub.sample_values(atoms.iter().map(|&i| f_k.values()[i]).collect())?;
        let basis = crate::poly::build_weighted(&sub, &sub_phi, &initial, s - 1)?;
        let sub_w = sub.weights();
        for (pos, &atom) in atoms.iter().enumerate() {
            let mut target = vec![Complex64::new(0.0, 0.0); s];
            target[pos] = Complex64::new(1.0, 0.0);
            let mut r = target.clone();
            for q in basis.samples() {
                let y = par::inner(sub_w, &target, q);
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= y * qi;
                }
            }
            let residual = par::norm_sq(sub_w, &r).sqrt();
            let scale = w[atom].sqrt();
            max_residual = max_residual.max(residual / scale);
        }
    }
    Ok(CyclicSetCheck {
        max_residual,
        degree_needed,
    })
}

/// Numerical insufficiency diagnostic for d < mp generators.
#[derive(Debug, Clone)]
pub struct InsufficiencyReport {
    /// Infimum over candidate sets of the hardest fiber-indicator residual.
    pub min_residual_lower_estimate: f64,
    /// Provable lower bound √(min fiber weight · (m−d)/m) maximized over
    /// fibers with m > d; every candidate set stays above it.
    pub structural_bound: f64,
    /// Size of the fiber certifying the bound.
    pub witness_fiber_size: usize,
    pub d: usize,
    pub trials: usize,
}

/// For any d functions, a fiber of size m > d only reaches a d-dimensional
/// subspace of its m-dimensional weighted space (polynomials in φ act as one
/// scalar per fiber), so some indicator keeps residual² ≥ min-weight·(m−d)/m.
/// The estimate is the exact best projection residual minimized over random
/// candidate sets; trial 0 uses the all-ones canonical set.
pub fn generator_insufficiency_test(
    mu: &DiscreteMeasure,
    phi: &SampledFunction,
    d: usize,
    trials: usize,
    seed: u64,
) -> Result<InsufficiencyReport> {
    let fm = fiber_map(mu, phi, MERGE_TOL)?;
    let mp = fm.fibers.iter().map(Vec::len).max().unwrap_or(0);
    if d == 0 {
        return Err(CoreError::InvalidInput(
            "need at least one generator".into(),
        ));
    }
    if d >= mp {
        return Err(CoreError::InvalidInput(format!(
            "d = {d} is not below the multiplicity mp = {mp}; the insufficiency test is meaningless"
        )));
    }
    let w = mu.weights();
    let big_fibers: Vec<&Vec<usize>> = fm.fibers.iter().filter(|f| f.len() > d).collect();

    let mut structural_bound = 0.0f64;
    let mut witness_fiber_size = 0usize;
    for fiber in &big_fibers {
        let m = fiber.len();
        let min_w = fiber.iter().map(|&i| w[i]).fold(f64::INFINITY, f64::min);
        let b = (min_w * (m - d) as f64 / m as f64).sqrt();
        if b > structural_bound {
            structural_bound = b;
            witness_fiber_size = m;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut estimate = f64::INFINITY;
    for trial in 0..=trials {
        // candidate set restricted fiber-by-fiber
        let mut hardest = 0.0f64;
        for fiber in &big_fibers {
            let m = fiber.len();
            let sub_w: Vec<f64> = fiber.iter().map(|&i| w[i]).collect();
            let candidates: Vec<Vec<Complex64>> = (0..d)
                .map(|j| {
                    (0..m)
                        .map(|i| {
                            if trial == 0 {
                                // canonical trial: all-ones, then index powers
                                Complex64::new((i as f64 + 1.0).powi(j as i32), 0.0)
                            } else {
                                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                            }
                        })
                        .collect()
                })
                .collect();
            let qr = fit::qr_complex(&candidates, &sub_w);
            for pos in 0..m {
                let mut target = vec![Complex64::new(0.0, 0.0); m];
                target[pos] = Complex64::new(1.0, 0.0);
                let mut r = target.clone();
                for (j, q) in qr.q.iter().enumerate() {
                    if !qr.live[j] {
                        continue;
                    }
                    let y = par::inner(&sub_w, &target, q);
                    for (ri, qi) in r.iter_mut().zip(q) {
                        *ri -= y * qi;
                    }
                }
                let residual = par::norm_sq(&sub_w, &r).sqrt();
                hardest = hardest.max(residual);
            }
        }
        estimate = estimate.min(hardest);
    }

    Ok(InsufficiencyReport {
        min_residual_lower_estimate: estimate,
        structural_bound,
        witness_fiber_size,
        d,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{bounded_transform, pushforward};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn four_atom_instance() -> (DiscreteMeasure, SampledFunction) {
        let mu = DiscreteMeasure::new((0..4).map(|i| (c(i as f64, 0.0), 0.25)).collect()).unwrap();
        let phi = mu
            .sample_values(vec![c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)])
            .unwrap();
        (mu, phi)
    }

    #[test]
    fn injective_phi_gives_single_layer() {
        let mu = DiscreteMeasure::new(vec![(c(0.0, 0.0), 0.5), (c(1.0, 0.0), 0.5)]).unwrap();
        let phi = mu.sample_values(vec![c(3.0, 1.0), c(-2.0, 0.5)]).unwrap();
        let layers = rohlin_decompose(&mu, &phi, MERGE_TOL).unwrap();
        assert_eq!(layers.n_layers(), 1);
        let push = pushforward(&mu, &phi, MERGE_TOL).unwrap();
        assert_eq!(layers.layers[0].points(), push.points());
        assert_eq!(layers.layers[0].weights(), push.weights());
        assert!(layers.continuous_part.is_none());
    }

    #[test]
    fn worked_two_layer_example() {
        // 4 atoms weight ¼, φ = (1,1,2,3): μ₁ = {1:¼, 2:¼, 3:¼}, μ₂ = {1:¼}
        let (mu, phi) = four_atom_instance();
        let layers = rohlin_decompose(&mu, &phi, MERGE_TOL).unwrap();
        assert_eq!(layers.n_layers(), 2);
        assert_eq!(layers.layers[0].len(), 3);
        assert_eq!(layers.layers[0].weights(), &[0.25, 0.25, 0.25]);
        assert_eq!(layers.layers[1].len(), 1);
        assert_eq!(layers.layers[1].points()[0], c(1.0, 0.0));
        // support nesting
        let supp0: std::collections::HashSet<_> = layers.layers[0]
            .points()
            .iter()
            .map(|z| (z.re.to_bits(), z.im.to_bits()))
            .collect();
        for z in layers.layers[1].points() {
            assert!(supp0.contains(&(z.re.to_bits(), z.im.to_bits())));
        }
    }

    #[test]
    fn local_multiplicity_counts_fibers() {
        let (mu, phi) = four_atom_instance();
        let report = local_multiplicity(&mu, &phi, MERGE_TOL).unwrap();
        assert_eq!(report.mp, 2);
        let m: std::collections::HashMap<_, _> = report
            .local
            .iter()
            .map(|(z, m)| (z.re as i64, *m))
            .collect();
        assert_eq!(m[&1], 2);
        assert_eq!(m[&2], 1);
        assert_eq!(m[&3], 1);
        assert_eq!(report.continuous_mass, 0.0);
    }

    #[test]
    fn constant_phi_multiplicity_is_atom_count() {
        let mu = DiscreteMeasure::new((0..5).map(|i| (c(i as f64, 0.0), 0.2)).collect()).unwrap();
        let phi = mu.constant(c(7.0, 0.0));
        let report = local_multiplicity(&mu, &phi, MERGE_TOL).unwrap();
        assert_eq!(report.mp, 5);
        assert_eq!(report.local.len(), 1);
    }

    #[test]
    fn transform_invariance_of_fibers() {
        let (mu, phi) = four_atom_instance();
        let k_phi = phi.map(bounded_transform);
        let before = rohlin_decompose(&mu, &phi, MERGE_TOL).unwrap();
        let after = rohlin_decompose(&mu, &k_phi, MERGE_TOL).unwrap();
        assert_eq!(before.layer_of_atom, after.layer_of_atom);
        assert_eq!(before.fiber_map.assignment, after.fiber_map.assignment);
        for (a, b) in before.layers.iter().zip(&after.layers) {
            assert_eq!(a.len(), b.len());
            for (&za, &zb) in a.points().iter().zip(b.points()) {
                assert!((bounded_transform(za) - zb).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn layer_sum_reconstructs_pushforward() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..30 {
            let n = rng.gen_range(3..60);
            let mu = DiscreteMeasure::new(
                (0..n)
                    .map(|i| (c(i as f64, 0.0), rng.gen_range(0.1..1.0)))
                    .collect(),
            )
            .unwrap();
            let pool = rng.gen_range(1..=(n / 2).max(1));
            let phi = mu
                .sample_values(
                    (0..n)
                        .map(|_| c(rng.gen_range(0..pool) as f64, 0.0))
                        .collect(),
                )
                .unwrap();
            let layers = rohlin_decompose(&mu, &phi, MERGE_TOL).unwrap();
            let push = pushforward(&mu, &phi, MERGE_TOL).unwrap();
            let mut sums: std::collections::HashMap<u64, f64> = std::collections::HashMap::new();
            for layer in &layers.layers {
                for (&z, &w) in layer.points().iter().zip(layer.weights()) {
                    *sums.entry(z.re.to_bits()).or_insert(0.0) += w;
                }
            }
            for (&z, &w) in push.points().iter().zip(push.weights()) {
                let got = sums[&z.re.to_bits()];
                assert!((got - w).abs() <= 1e-12 * w);
            }
        }
    }

    #[test]
    fn cyclic_set_reaches_all_indicators() {
        let (mu, phi) = four_atom_instance();
        let layers = rohlin_decompose(&mu, &phi, MERGE_TOL).unwrap();
        let set = build_cyclic_set(&mu, &phi, &layers).unwrap();
        assert_eq!(set.len(), 2);
        let check = verify_cyclic_set(&mu, &phi, &layers, &set).unwrap();
        assert!(
            check.max_residual <= 1e-10,
            "residual {}",
            check.max_residual
        );
        assert_eq!(check.degree_needed, 2); // layer 1 has 3 values
    }

    #[test]
    fn worked_insufficiency_example_returns_half() {
        // fiber of size 2, weights ½ each, d = 1, all-ones candidate:
        // best scalar is ½ and the residual is exactly ½.
        let mu = DiscreteMeasure::new(vec![(c(0.0, 0.0), 0.5), (c(1.0, 0.0), 0.5)]).unwrap();
        let phi = mu.constant(c(4.0, 0.0));
        let report = generator_insufficiency_test(&mu, &phi, 1, 8, 3).unwrap();
        assert!(
            (report.min_residual_lower_estimate - 0.5).abs() <= 1e-12,
            "estimate {}",
            report.min_residual_lower_estimate
        );
        assert!((report.structural_bound - 0.5).abs() <= 1e-12);
        assert_eq!(report.witness_fiber_size, 2);
    }

    #[test]
    fn insufficiency_positive_for_any_d_below_mp() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..10 {
            let n = rng.gen_range(6..40);
            let mu = DiscreteMeasure::new(
                (0..n)
                    .map(|i| (c(i as f64, 0.0), rng.gen_range(0.2..1.0)))
                    .collect(),
            )
            .unwrap();
            let pool = rng.gen_range(1..=(n / 3).max(1));
            let phi = mu
                .sample_values(
                    (0..n)
                        .map(|_| c(rng.gen_range(0..pool) as f64, 0.0))
                        .collect(),
                )
                .unwrap();
            let mp = local_multiplicity(&mu, &phi, MERGE_TOL).unwrap().mp;
            for d in 1..mp {
                let rep = generator_insufficiency_test(&mu, &phi, d, 4, 11).unwrap();
                assert!(rep.min_residual_lower_estimate > 0.0);
                assert!(
                    rep.min_residual_lower_estimate >= rep.structural_bound - 1e-12,
                    "estimate {} below bound {}",
                    rep.min_residual_lower_estimate,
                    rep.structural_bound
                );
            }
            // d = mp is refused; the cyclic set of size mp succeeds instead
            assert!(generator_insufficiency_test(&mu, &phi, mp, 2, 1).is_err());
            let layers = rohlin_decompose(&mu, &phi, MERGE_TOL).unwrap();
            let set = build_cyclic_set(&mu, &phi, &layers).unwrap();
            assert_eq!(set.len(), mp);
            let check = verify_cyclic_set(&mu, &phi, &layers, &set).unwrap();
            assert!(check.max_residual <= 1e-8);
        }
    }

    #[test]
    fn polynomials_in_phi_constant_on_fibers() {
        let (mu, phi) = four_atom_instance();
        let fm = fiber_map(&mu, &phi, MERGE_TOL).unwrap();
        // evaluate an arbitrary polynomial in φ and check fiber constancy
        let poly = |v: Complex64| v * v * c(0.3, 0.1) + v * c(-1.0, 0.2) + c(0.5, 0.0);
        let vals: Vec<Complex64> = phi.values().iter().map(|&v| poly(v)).collect();
        for fiber in &fm.fibers {
            for pair in fiber.windows(2) {
                assert_eq!(vals[pair[0]], vals[pair[1]]);
            }
        }
    }
}
