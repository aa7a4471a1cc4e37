//! Discrete measures on the plane, sampled functions bound to them, Lᵖ
//! (quasi-)distances, weight transfer, the bounded transform, and
//! pushforwards.
//!
//! A [`DiscreteMeasure`] is a finite list of weighted atoms; every measure
//! appearing here is of this form (continuum measures enter only through
//! quadrature). A [`SampledFunction`] holds one complex value per atom and is
//! tied to its measure by an id, so mixing up measures is a checked error
//! rather than silent nonsense.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::par;

/// Default absolute tolerance for identifying pushforward values.
pub const MERGE_TOL: f64 = 1e-12;

static NEXT_MEASURE_ID: AtomicU64 = AtomicU64::new(1);

/// Identifier binding sampled functions to the measure they were sampled on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MeasureId(u64);

fn fresh_id() -> MeasureId {
    MeasureId(NEXT_MEASURE_ID.fetch_add(1, Ordering::Relaxed))
}

/// A point of the plane with finite coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanePoint {
    re: f64,
    im: f64,
}

impl PlanePoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(re.is_finite() && im.is_finite()) {
            return Err(CoreError::InvalidInput(format!(
                "plane point coordinates must be finite, got ({re}, {im})"
            )));
        }
        Ok(PlanePoint { re, im })
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

impl From<PlanePoint> for Complex64 {
    fn from(p: PlanePoint) -> Self {
        p.to_complex()
    }
}

/// A point of ℝᵈ, d ≥ 1, with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPoint {
    coords: Vec<f64>,
}

impl RealPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(CoreError::InvalidInput(
                "real point needs at least one coordinate".into(),
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(CoreError::InvalidInput(
                "real point coordinates must be finite".into(),
            ));
        }
        Ok(RealPoint { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// Norm selector: a positive exponent or the sup norm.
///
/// For p ≥ 1 the distance is (Σ wᵢ|fᵢ−gᵢ|ᵖ)^{1/p}. For 0 < p < 1 it is the
/// metric Σ wᵢ|fᵢ−gᵢ|ᵖ without the outer root, so the triangle inequality is
/// exact and the reweight isometry holds verbatim.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    P(f64),
    Sup,
}

impl Norm {
    pub fn p(p: f64) -> Result<Norm> {
        if !(p.is_finite() && p > 0.0) {
            return Err(CoreError::InvalidExponent(p));
        }
        Ok(Norm::P(p))
    }

    pub fn exponent(&self) -> Option<f64> {
        match self {
            Norm::P(p) => Some(*p),
            Norm::Sup => None,
        }
    }
}

/// A finite positive measure given by weighted atoms in the plane.
///
/// All weights are strictly positive and atom points are pairwise distinct:
/// duplicate points passed to the constructor are merged by summing weights
/// (first occurrence keeps its position).
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    points: Vec<Complex64>,
    weights: Vec<f64>,
    id: MeasureId,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<(Complex64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(CoreError::InvalidMeasure("measure has no atoms".into()));
        }
        let mut points: Vec<Complex64> = Vec::with_capacity(atoms.len());
        let mut weights: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut seen: HashMap<(u64, u64), usize> = HashMap::with_capacity(atoms.len());
        for (z, w) in atoms {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(CoreError::InvalidMeasure(format!(
                    "atom at ({}, {}) is not finite",
                    z.re, z.im
                )));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(CoreError::InvalidMeasure(format!(
                    "atom weight {w} must be positive and finite"
                )));
            }
            let key = (z.re.to_bits(), z.im.to_bits());
            match seen.get(&key) {
                Some(&i) => weights[i] += w,
                None => {
                    seen.insert(key, points.len());
                    points.push(z);
                    weights.push(w);
                }
            }
        }
        Ok(DiscreteMeasure {
            points,
            weights,
            id: fresh_id(),
        })
    }

    pub fn from_plane_points(atoms: Vec<(PlanePoint, f64)>) -> Result<Self> {
        Self::new(
            atoms
                .into_iter()
                .map(|(p, w)| (p.to_complex(), w))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn id(&self) -> MeasureId {
        self.id
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Bind explicit per-atom values to this measure.
    pub fn sample_values(&self, values: Vec<Complex64>) -> Result<SampledFunction> {
        if values.len() != self.len() {
            return Err(CoreError::BindingMismatch {
                expected: self.len(),
                got: values.len(),
            });
        }
        Ok(SampledFunction {
            values,
            measure: self.id,
        })
    }

    /// Sample a pointwise function of the atom position.
    pub fn sample_with<F: FnMut(Complex64) -> Complex64>(&self, mut f: F) -> SampledFunction {
        SampledFunction {
            values: self.points.iter().map(|&z| f(z)).collect(),
            measure: self.id,
        }
    }

    /// The coordinate function z.
    pub fn coordinate(&self) -> SampledFunction {
        self.sample_with(|z| z)
    }

    /// The conjugate coordinate z̄.
    pub fn conj_coordinate(&self) -> SampledFunction {
        self.sample_with(|z| z.conj())
    }

    /// Indicator of a single atom.
    pub fn indicator(&self, index: usize) -> Result<SampledFunction> {
        if index >= self.len() {
            return Err(CoreError::InvalidInput(format!(
                "atom index {index} out of range ({} atoms)",
                self.len()
            )));
        }
        let mut values = vec![Complex64::new(0.0, 0.0); self.len()];
        values[index] = Complex64::new(1.0, 0.0);
        Ok(SampledFunction {
            values,
            measure: self.id,
        })
    }

    pub fn constant(&self, value: Complex64) -> SampledFunction {
        SampledFunction {
            values: vec![value; self.len()],
            measure: self.id,
        }
    }

    /// Push every atom through a point map; coinciding images merge.
    pub fn map_points<F: FnMut(Complex64) -> Complex64>(
        &self,
        mut f: F,
    ) -> Result<DiscreteMeasure> {
        DiscreteMeasure::new(
            self.points
                .iter()
                .zip(&self.weights)
                .map(|(&z, &w)| (f(z), w))
                .collect(),
        )
    }

    pub(crate) fn ensure_bound(&self, f: &SampledFunction) -> Result<()> {
        if f.measure != self.id || f.values.len() != self.len() {
            return Err(CoreError::BindingMismatch {
                expected: self.len(),
                got: f.values.len(),
            });
        }
        Ok(())
    }
}

/// Per-atom complex values of a measurable function on a measure's support.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    values: Vec<Complex64>,
    measure: MeasureId,
}

impl SampledFunction {
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn measure_id(&self) -> MeasureId {
        self.measure
    }

    /// Rebind to another measure with the same number of atoms. Used after
    /// reweighting, which keeps the atom list but produces a new measure.
    pub fn rebind_to(&self, mu: &DiscreteMeasure) -> Result<SampledFunction> {
        if self.values.len() != mu.len() {
            return Err(CoreError::BindingMismatch {
                expected: mu.len(),
                got: self.values.len(),
            });
        }
        Ok(SampledFunction {
            values: self.values.clone(),
            measure: mu.id,
        })
    }

    pub fn pointwise_mul(&self, other: &SampledFunction) -> Result<SampledFunction> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Pointwise quotient; fails where the denominator vanishes.
    pub fn pointwise_div(&self, other: &SampledFunction) -> Result<SampledFunction> {
        if let Some(i) = other.values.iter().position(|v| v.norm() == 0.0) {
            return Err(CoreError::ZeroAtAtom { index: i });
        }
        self.zip_with(other, |a, b| a / b)
    }

    pub fn conj(&self) -> SampledFunction {
        SampledFunction {
            values: self.values.iter().map(|v| v.conj()).collect(),
            measure: self.measure,
        }
    }

    pub fn map<F: FnMut(Complex64) -> Complex64>(&self, mut f: F) -> SampledFunction {
        SampledFunction {
            values: self.values.iter().map(|&v| f(v)).collect(),
            measure: self.measure,
        }
    }

    /// Index of the first atom where the function vanishes exactly, if any.
    pub fn first_zero(&self) -> Option<usize> {
        self.values.iter().position(|v| v.norm() == 0.0)
    }

    fn zip_with<F: FnMut(Complex64, Complex64) -> Complex64>(
        &self,
        other: &SampledFunction,
        mut f: F,
    ) -> Result<SampledFunction> {
        if self.measure != other.measure || self.values.len() != other.values.len() {
            return Err(CoreError::BindingMismatch {
                expected: self.values.len(),
                got: other.values.len(),
            });
        }
        Ok(SampledFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            measure: self.measure,
        })
    }
}

/// Lᵖ(μ) distance between two bound functions. See [`Norm`] for the p < 1
/// convention; for `Sup` the weights are ignored (every atom carries mass).
pub fn lp_distance(
    mu: &DiscreteMeasure,
    f: &SampledFunction,
    g: &SampledFunction,
    norm: Norm,
) -> Result<f64> {
    mu.ensure_bound(f)?;
    mu.ensure_bound(g)?;
    Ok(lp_distance_raw(mu.weights(), f.values(), g.values(), norm))
}

/// Lᵖ(μ) norm of a single bound function.
pub fn lp_norm(mu: &DiscreteMeasure, f: &SampledFunction, norm: Norm) -> Result<f64> {
    mu.ensure_bound(f)?;
    let zeros = vec![Complex64::new(0.0, 0.0); mu.len()];
    Ok(lp_distance_raw(mu.weights(), f.values(), &zeros, norm))
}

pub(crate) fn lp_distance_raw(w: &[f64], f: &[Complex64], g: &[Complex64], norm: Norm) -> f64 {
    match norm {
        Norm::Sup => f
            .iter()
            .zip(g)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max),
        Norm::P(p) => {
            let s = par::weighted_pow_sum(w, f, g, p);
            if p >= 1.0 {
                s.powf(1.0 / p)
            } else {
                s
            }
        }
    }
}

/// Transfer measure: ν has the same atoms as μ with weights wᵢ·|hᵢ|ᵖ.
///
/// Satisfies the exact isometry
/// `lp_distance(f, g·h, μ, p) = lp_distance(f/h, g, ν, p)`.
pub fn reweight_measure(
    mu: &DiscreteMeasure,
    h: &SampledFunction,
    p: f64,
) -> Result<DiscreteMeasure> {
    mu.ensure_bound(h)?;
    if !(p.is_finite() && p > 0.0) {
        return Err(CoreError::InvalidExponent(p));
    }
    if let Some(i) = h.first_zero() {
        return Err(CoreError::ZeroAtAtom { index: i });
    }
    let weights: Vec<f64> = mu
        .weights()
        .iter()
        .zip(h.values())
        .map(|(&w, v)| w * v.norm().powf(p))
        .collect();
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(CoreError::InvalidMeasure(format!(
            "reweighted atom weight {w} is not a positive finite number"
        )));
    }
    Ok(DiscreteMeasure {
        points: mu.points().to_vec(),
        weights,
        id: fresh_id(),
    })
}

/// The bounded transform k(z) = z/(1+|z|), mapping ℂ onto the open unit disc.
pub fn bounded_transform(z: Complex64) -> Complex64 {
    z / (1.0 + z.norm())
}

/// Inverse of the bounded transform, κ(w) = w/(1−|w|), defined for |w| < 1.
pub fn inverse_transform(w: Complex64) -> Result<Complex64> {
    let m = w.norm();
    if m >= 1.0 {
        return Err(CoreError::OutsideDisc { modulus: m });
    }
    Ok(w / (1.0 - m))
}

pub fn bounded_transform_point(p: PlanePoint) -> PlanePoint {
    let w = bounded_transform(p.to_complex());
    PlanePoint { re: w.re, im: w.im }
}

pub fn inverse_transform_point(p: PlanePoint) -> Result<PlanePoint> {
    let z = inverse_transform(p.to_complex())?;
    PlanePoint::new(z.re, z.im)
}

/// Group indices of `values` into clusters of equal value, where equality is
/// |Δre| ≤ tol and |Δim| ≤ tol (closed transitively). Returns cluster
/// representatives (first occurrence) and the atom → cluster assignment,
/// clusters ordered by first occurrence.
pub(crate) fn cluster_values(values: &[Complex64], tol: f64) -> (Vec<Complex64>, Vec<usize>) {
    let n = values.len();
    // Sort by real part, sweep a |Δre| ≤ tol window, and union near pairs.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .re
            .partial_cmp(&values[b].re)
            .unwrap()
            .then(values[a].im.partial_cmp(&values[b].im).unwrap())
            .then(a.cmp(&b))
    });
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (pos, &i) in order.iter().enumerate() {
        for &j in order[pos + 1..].iter() {
            if values[j].re - values[i].re > tol {
                break;
            }
            if (values[j].im - values[i].im).abs() <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    // Root at the smaller original index for determinism.
                    let (lo, hi) = if ri < rj { (ri, rj) } else { (rj, ri) };
                    parent[hi] = lo;
                }
            }
        }
    }
    let mut cluster_of_root: HashMap<usize, usize> = HashMap::new();
    let mut reps: Vec<Complex64> = Vec::new();
    let mut assignment = vec![0usize; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        let c = *cluster_of_root.entry(r).or_insert_with(|| {
            reps.push(values[r]);
            reps.len() - 1
        });
        assignment[i] = c;
    }
    (reps, assignment)
}

/// Pushforward φ(μ): atoms are the distinct values of φ, the weight of a
/// value is the total mass of its preimage. Values are identified up to
/// [`MERGE_TOL`]; pass `tol = 0.0` for bit-exact merging.
pub fn pushforward(
    mu: &DiscreteMeasure,
    phi: &SampledFunction,
    tol: f64,
) -> Result<DiscreteMeasure> {
    mu.ensure_bound(phi)?;
    let (reps, assignment) = cluster_values(phi.values(), tol);
    let mut weights = vec![0.0f64; reps.len()];
    for (i, &c) in assignment.iter().enumerate() {
        weights[c] += mu.weights()[i];
    }
    Ok(DiscreteMeasure {
        points: reps,
        weights,
        id: fresh_id(),
    })
}

/// Pushforward together with the atom → value-cluster assignment.
pub(crate) fn pushforward_with_assignment(
    mu: &DiscreteMeasure,
    phi: &SampledFunction,
    tol: f64,
) -> Result<(DiscreteMeasure, Vec<usize>)> {
    mu.ensure_bound(phi)?;
    let (reps, assignment) = cluster_values(phi.values(), tol);
    let mut weights = vec![0.0f64; reps.len()];
    for (i, &c) in assignment.iter().enumerate() {
        weights[c] += mu.weights()[i];
    }
    Ok((
        DiscreteMeasure {
            points: reps,
            weights,
            id: fresh_id(),
        },
        assignment,
    ))
}
