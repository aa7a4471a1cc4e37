//! Experiment configs and the pipeline runner behind `cyclab run` and the
//! presets: a seeded generator, a stage list, and deterministic report
//! emission (identical config + seed ⇒ byte-identical outputs).

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use cyclab_core::alpha::{approx_conjugate_on, slit_decomposition, GridSpec};
use cyclab_core::cyclic::{build_rho, cyclicity_test, default_targets};
use cyclab_core::gauss::{remainder_grid, taylor_gaussian_bound, verify_remainder_sup};
use cyclab_core::generators;
use cyclab_core::io;
use cyclab_core::measure::{pushforward, reweight_measure, MERGE_TOL};
use cyclab_core::poly::density_profile;
use cyclab_core::rohlin::{
    build_cyclic_set, generator_insufficiency_test, local_multiplicity, rohlin_decompose,
    verify_cyclic_set,
};
use cyclab_core::{CoreError, DiscreteMeasure, Norm, PlanePoint, Result, SampledFunction};

use crate::report::{fmt_f64, write_summary, CsvWriter};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    Disc {
        step: f64,
        #[serde(default)]
        normalized: bool,
    },
    Circle {
        n: usize,
    },
    Segment {
        a: f64,
        b: f64,
        n: usize,
    },
    Spiral {
        t0: f64,
        t1: f64,
        n: usize,
    },
    Random {
        n: usize,
        extent: f64,
    },
}

impl GeneratorSpec {
    pub fn build(&self, seed: u64) -> Result<DiscreteMeasure> {
        match *self {
            GeneratorSpec::Disc { step, normalized } => {
                generators::disc_quadrature(step, normalized)
            }
            GeneratorSpec::Circle { n } => generators::circle_nodes(n),
            GeneratorSpec::Segment { a, b, n } => generators::segment_nodes(a, b, n),
            GeneratorSpec::Spiral { t0, t1, n } => generators::spiral_nodes(t0, t1, n),
            GeneratorSpec::Random { n, extent } => {
                generators::random_box(n, (-extent, extent), (-extent, extent), seed)
            }
        }
    }
}

/// A sampled function given symbolically, inline, or from a file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FnSpec {
    /// z̄
    Conj,
    /// z
    Coordinate,
    /// constant 1
    One,
    /// e^{−|z|²}
    ExpNegAbsSq,
    /// e^{−2|z|}
    ExpNegTwoAbs,
    /// |z|²e^{−|z|}
    AbsSqExpNegAbs,
    /// indicator of one atom
    Indicator { index: usize },
    /// explicit values, positional
    Values { values: Vec<(f64, f64)> },
    /// function file, relative to the run directory
    File { path: String },
}

impl FnSpec {
    pub fn resolve(&self, mu: &DiscreteMeasure, dir: &Path) -> Result<SampledFunction> {
        match self {
            FnSpec::Conj => Ok(mu.conj_coordinate()),
            FnSpec::Coordinate => Ok(mu.coordinate()),
            FnSpec::One => Ok(mu.constant(Complex64::new(1.0, 0.0))),
            FnSpec::ExpNegAbsSq => {
                Ok(mu.sample_with(|z| Complex64::new((-z.norm_sqr()).exp(), 0.0)))
            }
            FnSpec::ExpNegTwoAbs => {
                Ok(mu.sample_with(|z| Complex64::new((-2.0 * z.norm()).exp(), 0.0)))
            }
            FnSpec::AbsSqExpNegAbs => {
                Ok(mu.sample_with(|z| Complex64::new(z.norm_sqr() * (-z.norm()).exp(), 0.0)))
            }
            FnSpec::Indicator { index } => mu.indicator(*index),
            FnSpec::Values { values } => mu.sample_values(
                values
                    .iter()
                    .map(|&(re, im)| Complex64::new(re, im))
                    .collect(),
            ),
            FnSpec::File { path } => io::read_function(&dir.join(path), mu),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Stage {
    Approx {
        target: FnSpec,
        /// "sup" or a positive exponent
        norm: String,
        degree_max: usize,
        #[serde(default)]
        weight: Option<FnSpec>,
        report: String,
    },
    GaussBound {
        k_max: u64,
        /// grid-verify the remainder sup for k up to this value
        #[serde(default)]
        verify_max: Option<u64>,
        report: String,
    },
    AlphaDecompose {
        nx: usize,
        ny: usize,
        eps: f64,
        levels: usize,
        out: String,
    },
    BuildRho {
        decomp: String,
        q_degree_cap: usize,
        out: String,
    },
    CyclicTest {
        weight: FnSpec,
        p: f64,
        degree_max: usize,
        tol: f64,
        indicators: usize,
        report: String,
    },
    Mult {
        phi: FnSpec,
        out: String,
    },
    Insufficiency {
        phi: FnSpec,
        d: usize,
        trials: usize,
        out: String,
    },
    Pushforward {
        phi: FnSpec,
        out: String,
    },
    Reweight {
        weight: FnSpec,
        p: f64,
        out: String,
    },
}

impl Stage {
    fn name(&self) -> &'static str {
        match self {
            Stage::Approx { .. } => "approx",
            Stage::GaussBound { .. } => "gauss-bound",
            Stage::AlphaDecompose { .. } => "alpha-decompose",
            Stage::BuildRho { .. } => "build-rho",
            Stage::CyclicTest { .. } => "cyclic-test",
            Stage::Mult { .. } => "mult",
            Stage::Insufficiency { .. } => "insufficiency",
            Stage::Pushforward { .. } => "pushforward",
            Stage::Reweight { .. } => "reweight",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub out_dir: PathBuf,
    pub generator: GeneratorSpec,
    #[serde(default)]
    pub pipeline: Vec<Stage>,
}

pub fn parse_norm(s: &str) -> Result<Norm> {
    if s.eq_ignore_ascii_case("sup") {
        return Ok(Norm::Sup);
    }
    let p: f64 = s
        .parse()
        .map_err(|_| CoreError::InvalidInput(format!("bad norm '{s}'")))?;
    Norm::p(p)
}

/// Execute the pipeline; returns the process exit code (0 ok, 2 when a
/// tolerance verdict failed). Any stage error aborts after flushing the
/// partial stages log and summary.
pub fn run_pipeline(config: &ExperimentConfig) -> Result<u8> {
    std::fs::create_dir_all(&config.out_dir)?;
    let dir = config.out_dir.clone();
    let mu = config.generator.build(config.seed)?;
    io::write_measure(&dir.join("measure.json"), &mu)?;

    let mut stage_rows: Vec<Vec<String>> = Vec::new();
    let mut exit: u8 = 0;
    let mut stage_error: Option<String> = None;

    for (idx, stage) in config.pipeline.iter().enumerate() {
        match run_stage(stage, &mu, &dir, config.seed) {
            Ok(verdict_failed) => {
                if verdict_failed {
                    exit = 2;
                }
                stage_rows.push(vec![
                    idx.to_string(),
                    stage.name().to_string(),
                    if verdict_failed {
                        "verdict-failed"
                    } else {
                        "ok"
                    }
                    .to_string(),
                ]);
            }
            Err(e) => {
                stage_rows.push(vec![
                    idx.to_string(),
                    stage.name().to_string(),
                    "error".into(),
                ]);
                stage_error = Some(e.to_string());
                break;
            }
        }
    }

    let mut csv = CsvWriter::create(&dir.join("stages.csv"), &["stage", "name", "status"])?;
    for row in &stage_rows {
        csv.row(row)?;
    }
    csv.finish()?;

    let summary = json!({
        "tool": "cyclab",
        "version": env!("CARGO_PKG_VERSION"),
        "seed": config.seed,
        "config": serde_json::to_value(config)?,
        "atoms": mu.len(),
        "total_mass": mu.total_mass(),
        "stages": stage_rows,
        "error": stage_error,
        "tolerances": {
            "merge_tol": MERGE_TOL,
            "irls_residual_tol": cyclab_core::fit::IRLS_RESIDUAL_TOL,
            "lawson_rel_tol": cyclab_core::fit::LAWSON_REL_TOL,
        },
    });
    write_summary(&dir.join("summary.json"), &summary)?;

    match stage_error {
        Some(msg) => Err(CoreError::InvalidInput(format!("stage failed: {msg}"))),
        None => Ok(exit),
    }
}

/// Returns whether a tolerance verdict failed.
fn run_stage(stage: &Stage, mu: &DiscreteMeasure, dir: &Path, seed: u64) -> Result<bool> {
    match stage {
        Stage::Approx {
            target,
            norm,
            degree_max,
            weight,
            report,
        } => {
            let t = target.resolve(mu, dir)?;
            let w = weight.as_ref().map(|w| w.resolve(mu, dir)).transpose()?;
            let norm = parse_norm(norm)?;
            let degrees: Vec<usize> = (0..=*degree_max).collect();
            let prof = density_profile(mu, &t, norm, &degrees, w.as_ref())?;
            let mut csv =
                CsvWriter::create(&dir.join(report), &["degree", "residual", "converged"])?;
            for p in prof {
                csv.row(&[
                    p.degree.to_string(),
                    fmt_f64(p.residual),
                    p.converged.to_string(),
                ])?;
            }
            csv.finish()?;
            Ok(false)
        }
        Stage::GaussBound {
            k_max,
            verify_max,
            report,
        } => {
            let mut csv = CsvWriter::create(
                &dir.join(report),
                &[
                    "k",
                    "bound",
                    "stirling_cap",
                    "empirical_sup",
                    "argmax",
                    "majorant_argmax",
                ],
            )?;
            for k in 0..=*k_max {
                let b = taylor_gaussian_bound(k);
                let (sup, argmax, maj) = match verify_max {
                    Some(vm) if k <= *vm => {
                        let chk = verify_remainder_sup(k, &remainder_grid(k))?;
                        (
                            fmt_f64(chk.empirical_sup),
                            fmt_f64(chk.argmax),
                            fmt_f64(chk.majorant_argmax),
                        )
                    }
                    _ => ("".into(), "".into(), "".into()),
                };
                csv.row(&[
                    k.to_string(),
                    fmt_f64(b.bound),
                    fmt_f64(b.stirling_cap),
                    sup,
                    argmax,
                    maj,
                ])?;
            }
            csv.finish()?;
            Ok(false)
        }
        Stage::AlphaDecompose {
            nx,
            ny,
            eps,
            levels,
            out,
        } => {
            let grid = centered_grid(mu, *nx, *ny)?;
            let d = slit_decomposition(mu, &grid, *eps, *levels)?;
            io::write_decomposition(&dir.join(out), &d)?;
            Ok(false)
        }
        Stage::BuildRho {
            decomp,
            q_degree_cap,
            out,
        } => {
            let d = io::read_decomposition(&dir.join(decomp))?;
            let qs: cyclab_core::Result<Vec<_>> = (1..=d.n_levels())
                .map(|l| approx_conjugate_on(&d, mu, l, *q_degree_cap))
                .collect();
            let rho = build_rho(&d, &qs?, mu)?;
            io::write_rho(&dir.join(out), &rho)?;
            Ok(false)
        }
        Stage::CyclicTest {
            weight,
            p,
            degree_max,
            tol,
            indicators,
            report,
        } => {
            let h = weight.resolve(mu, dir)?;
            let targets = default_targets(mu, seed, *indicators)?;
            let rep = cyclicity_test(mu, &h, Norm::p(*p)?, &targets, *degree_max, *tol, None)?;
            let mut csv = CsvWriter::create(
                &dir.join(report),
                &["target", "degree", "residual", "converged"],
            )?;
            for t in &rep.targets {
                for pt in &t.curve {
                    csv.row(&[
                        t.name.clone(),
                        pt.degree.to_string(),
                        fmt_f64(pt.residual),
                        pt.converged.to_string(),
                    ])?;
                }
            }
            csv.finish()?;
            Ok(!rep.cyclic)
        }
        Stage::Mult { phi, out } => {
            let f = phi.resolve(mu, dir)?;
            let report = local_multiplicity(mu, &f, MERGE_TOL)?;
            let layers = rohlin_decompose(mu, &f, MERGE_TOL)?;
            let set = build_cyclic_set(mu, &f, &layers)?;
            let check = verify_cyclic_set(mu, &f, &layers, &set)?;
            let value = json!({
                "local": report.local.iter().map(|(z, m)| json!({
                    "z": {"re": z.re, "im": z.im},
                    "m": m,
                })).collect::<Vec<_>>(),
                "mp": report.mp,
                "continuous_mass": report.continuous_mass,
                "layers": layers.layers.iter().map(|layer| json!({
                    "atoms": layer.points().iter().zip(layer.weights()).map(|(z, w)| json!({
                        "re": z.re, "im": z.im, "w": w,
                    })).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
                "assignment": layers.layer_of_atom,
                "cyclic_set_size": set.len(),
                "cyclic_set_max_residual": check.max_residual,
                "cyclic_set_degree_needed": check.degree_needed,
            });
            write_summary(&dir.join(out), &value)?;
            Ok(false)
        }
        Stage::Insufficiency {
            phi,
            d,
            trials,
            out,
        } => {
            let f = phi.resolve(mu, dir)?;
            let rep = generator_insufficiency_test(mu, &f, *d, *trials, seed)?;
            let value = json!({
                "d": rep.d,
                "trials": rep.trials,
                "min_residual_lower_estimate": rep.min_residual_lower_estimate,
                "structural_bound": rep.structural_bound,
                "witness_fiber_size": rep.witness_fiber_size,
                "reason": format!(
                    "a fiber of size {} only reaches a {}-dimensional subspace from {} generators",
                    rep.witness_fiber_size, rep.d, rep.d
                ),
            });
            write_summary(&dir.join(out), &value)?;
            Ok(false)
        }
        Stage::Pushforward { phi, out } => {
            let f = phi.resolve(mu, dir)?;
            let nu = pushforward(mu, &f, MERGE_TOL)?;
            io::write_measure(&dir.join(out), &nu)?;
            Ok(false)
        }
        Stage::Reweight { weight, p, out } => {
            let h = weight.resolve(mu, dir)?;
            let nu = reweight_measure(mu, &h, *p)?;
            io::write_measure(&dir.join(out), &nu)?;
            Ok(false)
        }
    }
}

/// Grid of nx×ny cells centered on the atoms' bounding box with a small
/// margin.
pub fn centered_grid(mu: &DiscreteMeasure, nx: usize, ny: usize) -> Result<GridSpec> {
    let (mut lo_re, mut hi_re) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut lo_im, mut hi_im) = (f64::INFINITY, f64::NEG_INFINITY);
    for z in mu.points() {
        lo_re = lo_re.min(z.re);
        hi_re = hi_re.max(z.re);
        lo_im = lo_im.min(z.im);
        hi_im = hi_im.max(z.im);
    }
    let span = (hi_re - lo_re).max(hi_im - lo_im).max(1e-9);
    let margin = 0.05 * span;
    let step = ((hi_re - lo_re).max(1e-9) + 2.0 * margin)
        .max((hi_im - lo_im).max(1e-9) + 2.0 * margin)
        / nx.min(ny) as f64;
    GridSpec::new(
        PlanePoint::new(lo_re - margin, lo_im - margin)?,
        step,
        nx,
        ny,
    )
}
