//! JSON file formats: measures, positional function samples, grid samples,
//! decompositions, and ρ weights.
//!
//! Floats are written through serde_json's shortest-roundtrip formatting, so
//! a value read back is bit-identical to the value written.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::alpha::{AlphaDecomposition, GridSpec};
use crate::cyclic::RhoWeight;
use crate::error::Result;
use crate::gauss::GridFn;
use crate::measure::{DiscreteMeasure, SampledFunction};

#[derive(Serialize, Deserialize)]
struct AtomRec {
    re: f64,
    im: f64,
    w: f64,
}

#[derive(Serialize, Deserialize)]
struct MeasureFile {
    atoms: Vec<AtomRec>,
}

#[derive(Serialize, Deserialize)]
struct ComplexRec {
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct FunctionFile {
    values: Vec<ComplexRec>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path)?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = File::open(path)?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

pub fn write_measure(path: &Path, mu: &DiscreteMeasure) -> Result<()> {
    write_json(
        path,
        &MeasureFile {
            atoms: mu
                .points()
                .iter()
                .zip(mu.weights())
                .map(|(z, &w)| AtomRec {
                    re: z.re,
                    im: z.im,
                    w,
                })
                .collect(),
        },
    )
}

/// Load a measure file; duplicate atoms merge with summed weights and
/// nonpositive weights are rejected, as in [`DiscreteMeasure::new`].
pub fn read_measure(path: &Path) -> Result<DiscreteMeasure> {
    let file: MeasureFile = read_json(path)?;
    DiscreteMeasure::new(
        file.atoms
            .into_iter()
            .map(|a| (Complex64::new(a.re, a.im), a.w))
            .collect(),
    )
}

pub fn write_function(path: &Path, f: &SampledFunction) -> Result<()> {
    write_json(
        path,
        &FunctionFile {
            values: f
                .values()
                .iter()
                .map(|v| ComplexRec { re: v.re, im: v.im })
                .collect(),
        },
    )
}

/// Load a function file positionally against `mu`; the value count must
/// match the atom count.
pub fn read_function(path: &Path, mu: &DiscreteMeasure) -> Result<SampledFunction> {
    let file: FunctionFile = read_json(path)?;
    mu.sample_values(
        file.values
            .into_iter()
            .map(|v| Complex64::new(v.re, v.im))
            .collect(),
    )
}

pub fn write_grid_fn(path: &Path, grid: &GridFn) -> Result<()> {
    write_json(path, grid)
}

pub fn read_grid_fn(path: &Path) -> Result<GridFn> {
    let grid: GridFn = read_json(path)?;
    grid.side()?;
    Ok(grid)
}

#[derive(Serialize, Deserialize)]
struct DecompFile {
    grid: GridSpec,
    levels: Vec<Vec<usize>>,
    slits: Vec<Vec<usize>>,
    coverage: Vec<f64>,
    slit_pitch: Vec<usize>,
    exempted: Vec<usize>,
    atom_level: Vec<Option<usize>>,
    total_mass: f64,
}

pub fn write_decomposition(path: &Path, d: &AlphaDecomposition) -> Result<()> {
    write_json(
        path,
        &DecompFile {
            grid: d.grid,
            levels: d.levels.clone(),
            slits: d.slits.clone(),
            coverage: d.coverage.clone(),
            slit_pitch: d.slit_pitch.clone(),
            exempted: d.exempted.clone(),
            atom_level: d.atom_level.clone(),
            total_mass: d.total_mass,
        },
    )
}

pub fn read_decomposition(path: &Path) -> Result<AlphaDecomposition> {
    let f: DecompFile = read_json(path)?;
    Ok(AlphaDecomposition {
        grid: f.grid,
        levels: f.levels,
        slits: f.slits,
        coverage: f.coverage,
        slit_pitch: f.slit_pitch,
        exempted: f.exempted,
        atom_level: f.atom_level,
        total_mass: f.total_mass,
    })
}

#[derive(Serialize, Deserialize)]
struct RhoFile {
    /// ρ as a positional function file (loadable wherever a weight function
    /// is expected).
    values: Vec<ComplexRec>,
    level: Vec<Option<usize>>,
    m_table: Vec<f64>,
    delta: Vec<f64>,
}

pub fn write_rho(path: &Path, rho: &RhoWeight) -> Result<()> {
    write_json(
        path,
        &RhoFile {
            values: rho
                .values
                .iter()
                .map(|&v| ComplexRec { re: v, im: 0.0 })
                .collect(),
            level: rho.level.clone(),
            m_table: rho.m_table.clone(),
            delta: rho.delta.clone(),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn measure_roundtrip_is_bit_exact() {
        let dir = std::env::temp_dir().join("cyclab-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.json");
        let mu = generators::spiral_nodes(-1.0, 1.5, 40).unwrap();
        write_measure(&path, &mu).unwrap();
        let back = read_measure(&path).unwrap();
        assert_eq!(mu.points(), back.points());
        assert_eq!(mu.weights(), back.weights());
    }

    #[test]
    fn function_file_binds_positionally() {
        let dir = std::env::temp_dir().join("cyclab-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("f.json");
        let mu = generators::segment_nodes(0.0, 1.0, 5).unwrap();
        let f = mu.sample_with(|z| z * z + Complex64::new(0.0, 1.0));
        write_function(&path, &f).unwrap();
        let back = read_function(&path, &mu).unwrap();
        assert_eq!(f.values(), back.values());

        let other = generators::segment_nodes(0.0, 1.0, 6).unwrap();
        assert!(read_function(&path, &other).is_err());
    }

    #[test]
    fn rho_file_reads_back_as_weight_function() {
        let dir = std::env::temp_dir().join("cyclab-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("rho.json");
        let mu = generators::segment_nodes(0.0, 2.0, 3).unwrap();
        let rho = RhoWeight {
            values: vec![1.0, 0.5, 0.25],
            level: vec![Some(1), Some(1), None],
            m_table: vec![1.0],
            delta: vec![2.0],
        };
        write_rho(&path, &rho).unwrap();
        let f = read_function(&path, &mu).unwrap();
        assert_eq!(f.values()[1], Complex64::new(0.5, 0.0));
    }
}
