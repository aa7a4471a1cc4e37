//! Slit decompositions of grid-discretized planar measures: increasing
//! cell-set levels F₁ ⊆ F₂ ⊆ … whose complements stay 4-connected and which
//! retain all but a budgeted fraction of the mass.
//!
//! Level n excludes a "comb" for every scale m ≥ n: vertical slit columns at
//! pitch ~2^{−m}·width plus one connecting horizontal channel, slits chosen
//! where they cost the least mass. Coarser levels exclude more combs, so the
//! levels increase by inclusion while every level keeps slits at its own
//! pitch and finer — the grid proxy for "empty interior". True topological
//! empty interior is impossible for finite unions of closed cells; the proxy
//! is the certified bound on full squares inside a level.

mod union_find;

pub use union_find::UnionFind;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::measure::{DiscreteMeasure, PlanePoint};
use crate::poly::{best_approx_sup, Polynomial};

/// Axis-aligned cell grid tiling a rectangle.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin_re: f64,
    pub origin_im: f64,
    pub step: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(origin: PlanePoint, step: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) || nx == 0 || ny == 0 {
            return Err(CoreError::InvalidGrid(format!(
                "bad grid: step {step}, {nx}x{ny} cells"
            )));
        }
        Ok(GridSpec {
            origin_re: origin.re(),
            origin_im: origin.im(),
            step,
            nx,
            ny,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn cell_of(&self, z: Complex64) -> Option<usize> {
        let fx = (z.re - self.origin_re) / self.step;
        let fy = (z.im - self.origin_im) / self.step;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let (ix, iy) = (fx.floor() as usize, fy.floor() as usize);
        if ix >= self.nx || iy >= self.ny {
            return None;
        }
        Some(self.index(ix, iy))
    }

    pub fn cell_center(&self, cell: usize) -> Complex64 {
        let (ix, iy) = (cell % self.nx, cell / self.nx);
        Complex64::new(
            self.origin_re + (ix as f64 + 0.5) * self.step,
            self.origin_im + (iy as f64 + 0.5) * self.step,
        )
    }
}

/// Increasing cell-set levels with slit bookkeeping and coverage record.
#[derive(Debug, Clone)]
pub struct AlphaDecomposition {
    pub grid: GridSpec,
    /// F₁ ⊆ F₂ ⊆ …, sorted cell indices.
    pub levels: Vec<Vec<usize>>,
    /// Mass-carrying cells removed from each level, sorted.
    pub slits: Vec<Vec<usize>>,
    /// Retained mass fraction per level.
    pub coverage: Vec<f64>,
    /// Slit pitch per level, in cells.
    pub slit_pitch: Vec<usize>,
    /// Cells exempted from slitting because their mass exceeded the budget.
    pub exempted: Vec<usize>,
    /// First covering level per atom (1-based); None = never covered.
    pub atom_level: Vec<Option<usize>>,
    pub total_mass: f64,
}

impl AlphaDecomposition {
    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    fn level_mask(&self, level: usize) -> Result<Vec<bool>> {
        if level == 0 || level > self.levels.len() {
            return Err(CoreError::InvalidLevel {
                level,
                levels: self.levels.len(),
            });
        }
        let mut mask = vec![false; self.grid.n_cells()];
        for &c in &self.levels[level - 1] {
            mask[c] = true;
        }
        Ok(mask)
    }
}

/// Union-find certificate for complement connectivity.
#[derive(Debug, Clone)]
pub struct ConnectivityCertificate {
    pub connected: bool,
    /// Component label per grid cell; cells of F carry `u32::MAX`, and the
    /// virtual outside component is labeled 0.
    pub component_of: Vec<u32>,
    pub components: usize,
}

/// Check that the complement of F_level (within the grid rectangle, together
/// with the unbounded outside) is a single 4-connected component.
pub fn check_complement_connected(
    decomp: &AlphaDecomposition,
    level: usize,
) -> Result<ConnectivityCertificate> {
    let mask = decomp.level_mask(level)?;
    Ok(complement_certificate(&decomp.grid, &mask))
}

fn complement_certificate(grid: &GridSpec, f_mask: &[bool]) -> ConnectivityCertificate {
    let n = grid.n_cells();
    let outside = n;
    let mut uf = UnionFind::new(n + 1);
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            let c = grid.index(ix, iy);
            if f_mask[c] {
                continue;
            }
            if ix == 0 || ix + 1 == grid.nx || iy == 0 || iy + 1 == grid.ny {
                uf.union(c, outside);
            }
            if ix + 1 < grid.nx && !f_mask[c + 1] {
                uf.union(c, c + 1);
            }
            if iy + 1 < grid.ny && !f_mask[c + grid.nx] {
                uf.union(c, c + grid.nx);
            }
        }
    }
    let out_root = uf.find(outside);
    let mut label = std::collections::HashMap::new();
    label.insert(out_root, 0u32);
    let mut component_of = vec![u32::MAX; n];
    let mut connected = true;
    for c in 0..n {
        if f_mask[c] {
            continue;
        }
        let root = uf.find(c);
        let next = label.len() as u32;
        let l = *label.entry(root).or_insert(next);
        component_of[c] = l;
        if l != 0 {
            connected = false;
        }
    }
    ConnectivityCertificate {
        connected,
        component_of,
        components: label.len(),
    }
}

/// Side length (in cells) of the largest full square contained in F_level.
pub fn max_full_square(decomp: &AlphaDecomposition, level: usize) -> Result<usize> {
    let mask = decomp.level_mask(level)?;
    let (nx, ny) = (decomp.grid.nx, decomp.grid.ny);
    let mut best = 0usize;
    let mut prev = vec![0usize; nx];
    for iy in 0..ny {
        let mut row = vec![0usize; nx];
        for ix in 0..nx {
            if !mask[decomp.grid.index(ix, iy)] {
                continue;
            }
            row[ix] = if ix == 0 {
                1
            } else {
                1 + row[ix - 1].min(prev[ix]).min(prev[ix - 1])
            };
            best = best.max(row[ix]);
        }
        prev = row;
    }
    Ok(best)
}

struct Comb {
    cells: Vec<bool>,
    pitch: usize,
}

/// Build the slit decomposition of `mu` on `grid`.
///
/// Per scale m the removed comb's mass stays within eps·2^{−(m+1)}·total, so
/// level n loses at most eps·2^{−n} of the mass and every level retains at
/// least 1 − eps. Cells too heavy for the budget are exempted (kept in F)
/// and reported. Complement connectivity is certified for every level before
/// returning; failure to keep 1 − eps of the mass or to certify connectivity
/// is an error.
pub fn slit_decomposition(
    mu: &DiscreteMeasure,
    grid: &GridSpec,
    eps: f64,
    n_levels: usize,
) -> Result<AlphaDecomposition> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(CoreError::InvalidInput(format!(
            "eps = {eps} must lie in (0, 1)"
        )));
    }
    if n_levels == 0 {
        return Err(CoreError::InvalidInput("need at least one level".into()));
    }
    let n = grid.n_cells();
    let mut cell_mass = vec![0.0f64; n];
    let mut atom_cell = Vec::with_capacity(mu.len());
    for (i, (&z, &w)) in mu.points().iter().zip(mu.weights()).enumerate() {
        let c = grid.cell_of(z).ok_or_else(|| {
            CoreError::InvalidInput(format!(
                "atom {i} at ({}, {}) lies outside the grid rectangle",
                z.re, z.im
            ))
        })?;
        cell_mass[c] += w;
        atom_cell.push(c);
    }
    let total: f64 = mu.total_mass();
    let mass_mask: Vec<bool> = cell_mass.iter().map(|&m| m > 0.0).collect();

    // Comb budgets: eps·2^{−m−1} per scale, with the last scale allowed
    // eps·2^{−L}; the tail sums Σ_{m≥n} then stay within eps·2^{−n}, which
    // keeps every level's removed mass at eps·2^{−n} and its coverage at
    // 1 − eps(1 − 2^{−n}) or better.
    let mut combs: Vec<Comb> = Vec::with_capacity(n_levels);
    let mut exempted: Vec<usize> = Vec::new();
    for m in 1..=n_levels {
        let pitch = (grid.nx >> m).max(2);
        let denom = if m == n_levels { 1 << m } else { 1 << (m + 1) };
        let budget = eps * total / denom as f64;
        let comb = build_comb(grid, &cell_mass, pitch, budget, &mut exempted);
        combs.push(Comb { cells: comb, pitch });
    }

    // Pocket rescue at the last level (largest F, hardest connectivity):
    // carve minimal-mass vertical escapes for complement components that the
    // finest comb leaves enclosed. The carve joins the finest comb, so every
    // level inherits it.
    rescue_pockets(grid, &mass_mask, &cell_mass, &mut combs, &mut exempted);

    // removed_n = union of combs m ≥ n
    let mut levels = Vec::with_capacity(n_levels);
    let mut slits = Vec::with_capacity(n_levels);
    let mut coverage = Vec::with_capacity(n_levels);
    let mut removed_acc: Vec<Vec<bool>> = vec![vec![false; n]; n_levels];
    for lvl in (0..n_levels).rev() {
        let mut acc = if lvl + 1 < n_levels {
            removed_acc[lvl + 1].clone()
        } else {
            vec![false; n]
        };
        for (c, &in_comb) in combs[lvl].cells.iter().enumerate() {
            if in_comb {
                acc[c] = true;
            }
        }
        removed_acc[lvl] = acc;
    }
    for lvl in 0..n_levels {
        let mut f_cells = Vec::new();
        let mut slit_cells = Vec::new();
        let mut kept = 0.0f64;
        for c in 0..n {
            if !mass_mask[c] {
                continue;
            }
            if removed_acc[lvl][c] {
                slit_cells.push(c);
            } else {
                f_cells.push(c);
                kept += cell_mass[c];
            }
        }
        levels.push(f_cells);
        slits.push(slit_cells);
        coverage.push(kept / total);
    }

    if coverage[0] < 1.0 - eps {
        return Err(CoreError::InvalidInput(format!(
            "slit budget infeasible: level 1 retains only {:.4} of the mass (need ≥ {:.4})",
            coverage[0],
            1.0 - eps
        )));
    }

    // first covering level per atom
    let atom_level: Vec<Option<usize>> = atom_cell
        .iter()
        .map(|&c| {
            let max_comb = (0..n_levels).rev().find(|&m| combs[m].cells[c]);
            match max_comb {
                Some(m) if m + 1 == n_levels => None,
                Some(m) => Some(m + 2),
                None => Some(1),
            }
        })
        .collect();

    let decomp = AlphaDecomposition {
        grid: *grid,
        levels,
        slits,
        coverage,
        slit_pitch: combs.iter().map(|c| c.pitch).collect(),
        exempted,
        atom_level,
        total_mass: total,
    };

    // Re-verify what the construction promises.
    for lvl in 1..=n_levels {
        let cert = check_complement_connected(&decomp, lvl)?;
        if !cert.connected {
            return Err(CoreError::InvalidInput(format!(
                "complement of level {lvl} is not connected ({} components)",
                cert.components
            )));
        }
    }
    Ok(decomp)
}

/// Full vertical columns at the given pitch plus one horizontal channel, with
/// the offset and row chosen to carry minimal mass. When the comb exceeds its
/// budget, whole parts (heaviest column, or the channel) are exempted first —
/// fragmenting a column would disconnect the complement — and their cells
/// reported.
fn build_comb(
    grid: &GridSpec,
    cell_mass: &[f64],
    pitch: usize,
    budget: f64,
    exempted: &mut Vec<usize>,
) -> Vec<bool> {
    let (nx, ny) = (grid.nx, grid.ny);
    let col_cells = |o: usize| -> Vec<usize> {
        let mut cells = Vec::with_capacity(ny);
        for iy in 0..ny {
            cells.push(grid.index(o, iy));
        }
        cells
    };
    let family_mass = |o: usize| -> f64 {
        let mut s = 0.0;
        let mut ix = o;
        while ix < nx {
            for iy in 0..ny {
                s += cell_mass[grid.index(ix, iy)];
            }
            ix += pitch;
        }
        s
    };
    let best_offset = (0..pitch.min(nx))
        .min_by(|&a, &b| {
            family_mass(a)
                .partial_cmp(&family_mass(b))
                .unwrap()
                .then(a.cmp(&b))
        })
        .unwrap_or(0);

    // parts: each slit column, plus the connecting channel row
    let mut parts: Vec<Vec<usize>> = Vec::new();
    let mut ix = best_offset;
    while ix < nx {
        parts.push(col_cells(ix));
        ix += pitch;
    }
    let in_columns = |cell: usize| -> bool {
        let cx = cell % nx;
        cx >= best_offset && (cx - best_offset).is_multiple_of(pitch)
    };
    let row_marginal = |iy: usize| -> f64 {
        (0..nx)
            .map(|ix| grid.index(ix, iy))
            .filter(|&c| !in_columns(c))
            .map(|c| cell_mass[c])
            .sum()
    };
    let best_row = (0..ny)
        .min_by(|&a, &b| {
            row_marginal(a)
                .partial_cmp(&row_marginal(b))
                .unwrap()
                .then(a.cmp(&b))
        })
        .unwrap_or(0);
    parts.push(
        (0..nx)
            .map(|ix| grid.index(ix, best_row))
            .filter(|&c| !in_columns(c))
            .collect(),
    );

    let part_mass: Vec<f64> = parts
        .iter()
        .map(|cells| cells.iter().map(|&c| cell_mass[c]).sum())
        .collect();
    let mut mass: f64 = part_mass.iter().sum();
    let mut keep = vec![true; parts.len()];
    while mass > budget {
        // drop the heaviest remaining part
        let victim = (0..parts.len())
            .filter(|&i| keep[i] && part_mass[i] > 0.0)
            .max_by(|&a, &b| {
                part_mass[a]
                    .partial_cmp(&part_mass[b])
                    .unwrap()
                    .then(b.cmp(&a))
            });
        match victim {
            Some(i) => {
                keep[i] = false;
                mass -= part_mass[i];
                exempted.extend(parts[i].iter().filter(|&&c| cell_mass[c] > 0.0));
            }
            None => break,
        }
    }

    let mut comb = vec![false; grid.n_cells()];
    for (cells, &k) in parts.iter().zip(&keep) {
        if k {
            for &c in cells {
                comb[c] = true;
            }
        }
    }
    comb
}

fn rescue_pockets(
    grid: &GridSpec,
    mass_mask: &[bool],
    cell_mass: &[f64],
    combs: &mut [Comb],
    exempted: &mut Vec<usize>,
) {
    let n = grid.n_cells();
    let last = combs.len() - 1;
    for _attempt in 0..grid.ny {
        let f_mask: Vec<bool> = (0..n)
            .map(|c| mass_mask[c] && !combs[last].cells[c])
            .collect();
        let cert = complement_certificate(grid, &f_mask);
        if cert.connected {
            return;
        }
        // Cheapest vertical carve from any pocket cell to the rectangle edge.
        let mut best: Option<(f64, Vec<usize>)> = None;
        for c in 0..n {
            if cert.component_of[c] == u32::MAX || cert.component_of[c] == 0 {
                continue;
            }
            let (ix, iy) = (c % grid.nx, c / grid.nx);
            for dir in [-1i64, 1] {
                let mut cost = 0.0;
                let mut path = Vec::new();
                let mut y = iy as i64 + dir;
                while y >= 0 && (y as usize) < grid.ny {
                    let cell = grid.index(ix, y as usize);
                    if f_mask[cell] {
                        cost += cell_mass[cell];
                        path.push(cell);
                    }
                    y += dir;
                }
                if best.as_ref().is_none_or(|(bc, _)| cost < *bc) {
                    best = Some((cost, path));
                }
            }
        }
        match best {
            Some((_, path)) if !path.is_empty() => {
                for c in path {
                    combs[last].cells[c] = true;
                    exempted.retain(|&e| e != c);
                }
            }
            _ => return,
        }
    }
}

/// Outcome of approximating z̄ in the sup norm on the atoms of one level.
#[derive(Debug, Clone)]
pub struct ConjugateApprox {
    pub poly: Polynomial,
    pub sup_err: f64,
    /// e^{−δ} with δ = level · sup over the level's atoms of |z|.
    pub target_accuracy: f64,
    pub met: bool,
    pub degree_used: usize,
    pub delta: f64,
}

/// Sup-norm approximation of k(z) = z̄ on the atoms lying in F_level,
/// escalating the degree until the accuracy e^{−δ_n} is met or the cap is
/// reached. The theoretical guarantee is asymptotic; the achieved pair is
/// recorded either way, flagged by `met`.
pub fn approx_conjugate_on(
    decomp: &AlphaDecomposition,
    mu: &DiscreteMeasure,
    level: usize,
    degree_cap: usize,
) -> Result<ConjugateApprox> {
    if level == 0 || level > decomp.n_levels() {
        return Err(CoreError::InvalidLevel {
            level,
            levels: decomp.n_levels(),
        });
    }
    if decomp.atom_level.len() != mu.len() {
        return Err(CoreError::BindingMismatch {
            expected: decomp.atom_level.len(),
            got: mu.len(),
        });
    }
    let atoms: Vec<usize> = (0..mu.len())
        .filter(|&i| decomp.atom_level[i].is_some_and(|l| l <= level))
        .collect();
    if atoms.is_empty() {
        return Ok(ConjugateApprox {
            poly: Polynomial::zero(),
            sup_err: 0.0,
            target_accuracy: 1.0,
            met: true,
            degree_used: 0,
            delta: 0.0,
        });
    }
    let sub = DiscreteMeasure::new(
        atoms
            .iter()
            .map(|&i| (mu.points()[i], mu.weights()[i]))
            .collect(),
    )?;
    let delta = level as f64 * sub.points().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let target_accuracy = (-delta).exp();
    let target = sub.conj_coordinate();

    let mut schedule: Vec<usize> = Vec::new();
    let mut d = 1usize;
    while d < degree_cap {
        schedule.push(d);
        d *= 2;
    }
    schedule.push(degree_cap);

    let mut best: Option<(Polynomial, f64, usize)> = None;
    for d in schedule {
        let res = best_approx_sup(&sub, &target, d)?;
        if best.as_ref().is_none_or(|(_, e, _)| res.residual < *e) {
            best = Some((res.poly, res.residual, d));
        }
        if best.as_ref().unwrap().1 < target_accuracy {
            break;
        }
    }
    let (poly, sup_err, degree_used) = best.unwrap();
    Ok(ConjugateApprox {
        met: sup_err < target_accuracy,
        poly,
        sup_err,
        target_accuracy,
        degree_used,
        delta,
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

    fn disc_measure(step: f64) -> DiscreteMeasure {
        let n = (2.0 / step).ceil() as i64;
        let mut atoms = Vec::new();
        for iy in 0..n {
            for ix in 0..n {
                let x = -1.0 + (ix as f64 + 0.5) * step;
                let y = -1.0 + (iy as f64 + 0.5) * step;
                if x * x + y * y < 1.0 {
                    atoms.push((c(x, y), step * step));
                }
            }
        }
        DiscreteMeasure::new(atoms).unwrap()
    }

    /// Grid twice as fine as the atom spacing, shifted half a fine cell so
    /// atoms sit at centers of alternating columns.
    fn offset_grid(atom_step: f64, extent: f64) -> GridSpec {
        let step = atom_step / 2.0;
        let n = (2.0 * extent / step).round() as usize + 1;
        GridSpec::new(
            PlanePoint::new(-extent - step / 2.0, -extent - step / 2.0).unwrap(),
            step,
            n,
            n,
        )
        .unwrap()
    }

    #[test]
    fn five_isolated_atoms_need_no_slits() {
        let mu = DiscreteMeasure::new(
            (0..5)
                .map(|i| (c(i as f64 * 0.2 - 0.4, 0.1 * i as f64), 0.2))
                .collect(),
        )
        .unwrap();
        let grid = offset_grid(0.2, 1.0);
        let d = slit_decomposition(&mu, &grid, 0.1, 2).unwrap();
        assert_eq!(d.levels[0].len(), 5);
        assert!(d.slits[0].is_empty());
        assert_eq!(d.coverage[0], 1.0);
        assert!(d.atom_level.iter().all(|l| *l == Some(1)));
        let cert = check_complement_connected(&d, 1).unwrap();
        assert!(cert.connected);
    }

    #[test]
    fn disc_decomposition_certificates() {
        let mu = disc_measure(1.0 / 16.0);
        let grid = offset_grid(1.0 / 16.0, 1.0);
        let d = slit_decomposition(&mu, &grid, 0.05, 4).unwrap();
        for lvl in 0..4 {
            // inclusion chain
            if lvl + 1 < 4 {
                let set: std::collections::HashSet<_> = d.levels[lvl + 1].iter().collect();
                assert!(d.levels[lvl].iter().all(|c| set.contains(c)));
            }
            assert!(d.coverage[lvl] >= 0.95);
            // per-level mass bound eps·2^{−n}
            assert!(1.0 - d.coverage[lvl] <= 0.05 / (1 << (lvl + 1)) as f64 + 1e-12);
            let cert = check_complement_connected(&d, lvl + 1).unwrap();
            assert!(cert.connected, "level {}", lvl + 1);
            let side = max_full_square(&d, lvl + 1).unwrap();
            assert!(
                side <= 2 * d.slit_pitch[lvl],
                "level {}: square {side} vs pitch {}",
                lvl + 1,
                d.slit_pitch[lvl]
            );
        }
    }

    #[test]
    fn mass_accounting_and_eps_budget_on_random_measures() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for trial in 0..10 {
            let n = rng.gen_range(20..200);
            let mu = DiscreteMeasure::new(
                (0..n)
                    .map(|_| {
                        (
                            c(rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9)),
                            rng.gen_range(0.1..1.0),
                        )
                    })
                    .collect(),
            )
            .unwrap();
            let grid = GridSpec::new(PlanePoint::new(-1.0, -1.0).unwrap(), 0.125, 16, 16).unwrap();
            let eps = 0.3;
            let d = slit_decomposition(&mu, &grid, eps, 3).unwrap();
            // removed ≤ eps on every level, and union-level mass accounting
            for lvl in 0..3 {
                assert!(1.0 - d.coverage[lvl] <= eps + 1e-12, "trial {trial}");
            }
            let kept: f64 = d.levels[2]
                .iter()
                .map(|&cell| {
                    mu.points()
                        .iter()
                        .zip(mu.weights())
                        .filter(|(z, _)| grid.cell_of(**z) == Some(cell))
                        .map(|(_, w)| w)
                        .sum::<f64>()
                })
                .sum();
            let never: f64 = mu
                .weights()
                .iter()
                .zip(&d.atom_level)
                .filter(|(_, l)| l.is_none())
                .map(|(w, _)| w)
                .sum();
            assert!(
                (kept + never - mu.total_mass()).abs() <= 1e-12 * mu.total_mass(),
                "trial {trial}: {kept} + {never} vs {}",
                mu.total_mass()
            );
        }
    }

    #[test]
    fn annulus_of_cells_fails_connectivity() {
        // Hand-built decomposition whose F is a ring enclosing a hole.
        let grid = GridSpec::new(PlanePoint::new(0.0, 0.0).unwrap(), 1.0, 7, 7).unwrap();
        let mut ring = Vec::new();
        for iy in 1..6 {
            for ix in 1..6 {
                if ix == 1 || ix == 5 || iy == 1 || iy == 5 {
                    ring.push(grid.index(ix, iy));
                }
            }
        }
        let d = AlphaDecomposition {
            grid,
            levels: vec![ring.clone()],
            slits: vec![vec![]],
            coverage: vec![1.0],
            slit_pitch: vec![4],
            exempted: vec![],
            atom_level: vec![],
            total_mass: 1.0,
        };
        let cert = check_complement_connected(&d, 1).unwrap();
        assert!(!cert.connected);
        assert_eq!(cert.components, 2);

        // empty F is trivially fine
        let empty = AlphaDecomposition {
            levels: vec![vec![]],
            ..d
        };
        assert!(check_complement_connected(&empty, 1).unwrap().connected);
    }

    #[test]
    fn enclosing_measure_gets_rescued() {
        // Atoms forming a thick ring; the enclosed empty cells must be
        // carved open so the complement stays connected.
        let mut atoms = Vec::new();
        for iy in 0..16 {
            for ix in 0..16 {
                let inside_hole = (6..10).contains(&ix) && (6..10).contains(&iy);
                if !inside_hole {
                    atoms.push((c(ix as f64 * 0.1 + 0.05, iy as f64 * 0.1 + 0.05), 0.01));
                }
            }
        }
        let mu = DiscreteMeasure::new(atoms).unwrap();
        let grid = GridSpec::new(PlanePoint::new(0.0, 0.0).unwrap(), 0.1, 16, 16).unwrap();
        let d = slit_decomposition(&mu, &grid, 0.9, 2).unwrap();
        for lvl in 1..=2 {
            assert!(check_complement_connected(&d, lvl).unwrap().connected);
        }
    }

    #[test]
    fn finer_grid_never_decreases_coverage() {
        let mu = disc_measure(1.0 / 8.0);
        let coarse = offset_grid(1.0 / 8.0, 1.0);
        let fine = GridSpec::new(
            PlanePoint::new(coarse.origin_re, coarse.origin_im).unwrap(),
            coarse.step / 2.0,
            coarse.nx * 2,
            coarse.ny * 2,
        )
        .unwrap();
        let dc = slit_decomposition(&mu, &coarse, 0.2, 3).unwrap();
        let df = slit_decomposition(&mu, &fine, 0.2, 3).unwrap();
        for lvl in 0..3 {
            assert!(df.coverage[lvl] >= dc.coverage[lvl] - 1e-12);
        }
    }

    #[test]
    fn conjugate_on_real_axis_level() {
        let mu = DiscreteMeasure::new(
            (0..32)
                .map(|i| (c(i as f64 / 31.0, 0.0), 1.0 / 32.0))
                .collect(),
        )
        .unwrap();
        let grid = offset_grid(1.0 / 31.0, 1.1);
        let d = slit_decomposition(&mu, &grid, 0.1, 2).unwrap();
        let q = approx_conjugate_on(&d, &mu, 1, 8).unwrap();
        assert!(q.sup_err <= 1e-9, "sup_err {}", q.sup_err);
        assert!(q.met);
        assert!(q.degree_used <= 2);
    }

    #[test]
    fn conjugate_on_scattered_atoms_interpolates() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mu = DiscreteMeasure::new(
            (0..5)
                .map(|_| (c(rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8)), 0.2))
                .collect(),
        )
        .unwrap();
        let grid = GridSpec::new(PlanePoint::new(-1.0, -1.0).unwrap(), 0.01, 200, 200).unwrap();
        let d = slit_decomposition(&mu, &grid, 0.2, 1).unwrap();
        let q = approx_conjugate_on(&d, &mu, 1, 4).unwrap();
        assert!(q.sup_err <= 1e-8, "sup_err {}", q.sup_err);
    }
}
