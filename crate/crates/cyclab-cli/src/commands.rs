//! Per-subcommand implementations. Each returns the process exit code: 0 for
//! success, 2 for a tolerance-verdict failure; errors map to 3 in main.

use std::path::Path;

use serde_json::json;

use cyclab_core::alpha::{
    approx_conjugate_on, check_complement_connected, slit_decomposition, GridSpec,
};
use cyclab_core::cyclic::{build_rho, cyclicity_test, default_targets};
use cyclab_core::gauss::{
    gaussian_weighted_sup_approx, remainder_grid, taylor_gaussian_bound, verify_remainder_sup,
};
use cyclab_core::generators;
use cyclab_core::io;
use cyclab_core::measure::{pushforward, reweight_measure, MERGE_TOL};
use cyclab_core::poly::density_profile;
use cyclab_core::{CoreError, Norm, PlanePoint, Result};

use crate::args::*;
use crate::pipeline::{parse_norm, run_pipeline, ExperimentConfig};
use crate::presets;
use crate::report::{fmt_f64, write_summary, CsvWriter};

pub fn dispatch(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Measure { cmd } => measure_cmd(cmd),
        Cmd::Approx(args) => approx_cmd(args),
        Cmd::Gauss { cmd } => gauss_cmd(cmd),
        Cmd::Alpha { cmd } => alpha_cmd(cmd),
        Cmd::Cyclic { cmd } => cyclic_cmd(cmd),
        Cmd::Mult { cmd } => mult_cmd(cmd),
        Cmd::Generate(args) => generate_cmd(args),
        Cmd::Preset(args) => presets::run_preset(args),
        Cmd::Run { config } => {
            let text = std::fs::read_to_string(&config)?;
            let cfg: ExperimentConfig = serde_json::from_str(&text)?;
            run_pipeline(&cfg)
        }
    }
}

fn measure_cmd(cmd: MeasureCmd) -> Result<u8> {
    match cmd {
        MeasureCmd::Validate { measure } => {
            let mu = io::read_measure(&measure)?;
            println!(
                "valid measure: {} atoms, total mass {}",
                mu.len(),
                fmt_f64(mu.total_mass())
            );
            Ok(0)
        }
        MeasureCmd::Pushforward {
            measure,
            function,
            out,
            merge_tol,
        } => {
            let mu = io::read_measure(&measure)?;
            let phi = io::read_function(&function, &mu)?;
            let nu = pushforward(&mu, &phi, merge_tol)?;
            io::write_measure(&out, &nu)?;
            println!(
                "pushforward: {} atoms -> {} values, mass {}",
                mu.len(),
                nu.len(),
                fmt_f64(nu.total_mass())
            );
            Ok(0)
        }
        MeasureCmd::Reweight {
            measure,
            function,
            p,
            out,
        } => {
            let mu = io::read_measure(&measure)?;
            let h = io::read_function(&function, &mu)?;
            let nu = reweight_measure(&mu, &h, p)?;
            io::write_measure(&out, &nu)?;
            println!(
                "reweighted measure written: mass {}",
                fmt_f64(nu.total_mass())
            );
            Ok(0)
        }
    }
}

fn approx_cmd(args: ApproxArgs) -> Result<u8> {
    let mu = io::read_measure(&args.measure)?;
    let target = io::read_function(&args.function, &mu)?;
    let weight = args
        .weight_fn
        .as_ref()
        .map(|p| io::read_function(p, &mu))
        .transpose()?;
    let norm = parse_norm(&args.norm)?;
    let degrees: Vec<usize> = (0..=args.degree_max).collect();
    let prof = density_profile(&mu, &target, norm, &degrees, weight.as_ref())?;
    let mut csv = CsvWriter::create(&args.report, &["degree", "residual", "converged"])?;
    for p in &prof {
        csv.row(&[
            p.degree.to_string(),
            fmt_f64(p.residual),
            p.converged.to_string(),
        ])?;
    }
    csv.finish()?;
    if let Some(last) = prof.last() {
        println!(
            "degree {}: residual {}",
            last.degree,
            fmt_f64(last.residual)
        );
    }
    Ok(0)
}

fn gauss_cmd(cmd: GaussCmd) -> Result<u8> {
    match cmd {
        GaussCmd::Bound { k, verify } => {
            let b = taylor_gaussian_bound(k);
            println!("k = {k}");
            println!("bound        = {}", fmt_f64(b.bound));
            println!("stirling_cap = {}", fmt_f64(b.stirling_cap));
            if verify {
                if k > 200 {
                    return Err(CoreError::InvalidInput(
                        "grid verification supported for k ≤ 200".into(),
                    ));
                }
                let chk = verify_remainder_sup(k, &remainder_grid(k))?;
                println!("empirical_sup   = {}", fmt_f64(chk.empirical_sup));
                println!("argmax          = {}", fmt_f64(chk.argmax));
                println!("majorant_argmax = {}", fmt_f64(chk.majorant_argmax));
            }
            Ok(0)
        }
        GaussCmd::Sample {
            target,
            dim,
            extent,
            step,
            out,
        } => {
            let grid = match target {
                GridTarget::Hat => cyclab_core::gauss::GridFn::sample(dim, extent, step, |x| {
                    (1.0 - x.iter().map(|v| v * v).sum::<f64>().sqrt()).max(0.0)
                })?,
                GridTarget::Gaussian => {
                    cyclab_core::gauss::GridFn::sample(dim, extent, step, |x| {
                        (-x.iter().map(|v| v * v).sum::<f64>()).exp()
                    })?
                }
            };
            io::write_grid_fn(&out, &grid)?;
            println!("wrote {} grid values", grid.values.len());
            Ok(0)
        }
        GaussCmd::Approx {
            target,
            c,
            degree_max,
            lawson_iters,
            report,
        } => {
            let grid = io::read_grid_fn(&target)?;
            let degrees: Vec<usize> = (0..=degree_max).collect();
            let fit = gaussian_weighted_sup_approx(&grid, c, &degrees, lawson_iters)?;
            let mut csv = CsvWriter::create(&report, &["degree", "sup_error", "converged"])?;
            for p in &fit.profile {
                csv.row(&[
                    p.degree.to_string(),
                    fmt_f64(p.sup_error),
                    p.converged.to_string(),
                ])?;
            }
            csv.finish()?;
            println!(
                "best sup error {} (tail weight {})",
                fmt_f64(fit.sup_error),
                fmt_f64(fit.tail_weight)
            );
            Ok(0)
        }
    }
}

fn parse_grid_flag(mu_path: &Path, grid: &str) -> Result<(GridSpec, cyclab_core::DiscreteMeasure)> {
    let mu = io::read_measure(mu_path)?;
    let parts: Vec<&str> = grid.split(',').collect();
    if parts.len() != 3 {
        return Err(CoreError::InvalidInput(format!(
            "--grid expects nx,ny,step, got '{grid}'"
        )));
    }
    let nx: usize = parts[0]
        .trim()
        .parse()
        .map_err(|_| CoreError::InvalidInput(format!("bad nx '{}'", parts[0])))?;
    let ny: usize = parts[1]
        .trim()
        .parse()
        .map_err(|_| CoreError::InvalidInput(format!("bad ny '{}'", parts[1])))?;
    let step: f64 = parts[2]
        .trim()
        .parse()
        .map_err(|_| CoreError::InvalidInput(format!("bad step '{}'", parts[2])))?;
    // center the rectangle on the atoms
    let (mut lo_re, mut hi_re) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut lo_im, mut hi_im) = (f64::INFINITY, f64::NEG_INFINITY);
    for z in mu.points() {
        lo_re = lo_re.min(z.re);
        hi_re = hi_re.max(z.re);
        lo_im = lo_im.min(z.im);
        hi_im = hi_im.max(z.im);
    }
    let cx = 0.5 * (lo_re + hi_re);
    let cy = 0.5 * (lo_im + hi_im);
    let spec = GridSpec::new(
        PlanePoint::new(cx - 0.5 * nx as f64 * step, cy - 0.5 * ny as f64 * step)?,
        step,
        nx,
        ny,
    )?;
    Ok((spec, mu))
}

fn alpha_cmd(cmd: AlphaCmd) -> Result<u8> {
    match cmd {
        AlphaCmd::Decompose {
            measure,
            grid,
            eps,
            levels,
            out,
        } => {
            let (spec, mu) = parse_grid_flag(&measure, &grid)?;
            let d = slit_decomposition(&mu, &spec, eps, levels)?;
            for lvl in 1..=d.n_levels() {
                let cert = check_complement_connected(&d, lvl)?;
                println!(
                    "level {lvl}: coverage {}, complement connected: {}",
                    fmt_f64(d.coverage[lvl - 1]),
                    cert.connected
                );
            }
            io::write_decomposition(&out, &d)?;
            Ok(0)
        }
    }
}

fn cyclic_cmd(cmd: CyclicCmd) -> Result<u8> {
    match cmd {
        CyclicCmd::BuildRho {
            decomp,
            measure,
            q_degree_cap,
            out,
        } => {
            let mu = io::read_measure(&measure)?;
            let d = io::read_decomposition(&decomp)?;
            let qs: Result<Vec<_>> = (1..=d.n_levels())
                .map(|l| approx_conjugate_on(&d, &mu, l, q_degree_cap))
                .collect();
            let qs = qs?;
            for (l, q) in qs.iter().enumerate() {
                println!(
                    "level {}: sup_err {} target {} met {}",
                    l + 1,
                    fmt_f64(q.sup_err),
                    fmt_f64(q.target_accuracy),
                    q.met
                );
            }
            let rho = build_rho(&d, &qs, &mu)?;
            io::write_rho(&out, &rho)?;
            Ok(0)
        }
        CyclicCmd::Test {
            measure,
            weight_fn,
            p,
            degree_max,
            tol,
            indicators,
            seed,
            report,
        } => {
            let mu = io::read_measure(&measure)?;
            let h = io::read_function(&weight_fn, &mu)?;
            let targets = default_targets(&mu, seed, indicators)?;
            let rep = cyclicity_test(&mu, &h, Norm::p(p)?, &targets, degree_max, tol, None)?;
            let mut csv =
                CsvWriter::create(&report, &["target", "degree", "residual", "converged"])?;
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
            if let Some(i) = rep.zero_atom {
                println!("not cyclic: weight vanishes at atom {i}");
                return Ok(2);
            }
            println!(
                "verdict: {} at (degree {}, tol {})",
                if rep.cyclic { "cyclic" } else { "not cyclic" },
                degree_max,
                fmt_f64(tol)
            );
            Ok(if rep.cyclic { 0 } else { 2 })
        }
    }
}

fn mult_cmd(cmd: MultCmd) -> Result<u8> {
    match cmd {
        MultCmd::Analyze {
            measure,
            function,
            out,
        } => {
            let mu = io::read_measure(&measure)?;
            let phi = io::read_function(&function, &mu)?;
            let report = cyclab_core::rohlin::local_multiplicity(&mu, &phi, MERGE_TOL)?;
            let layers = cyclab_core::rohlin::rohlin_decompose(&mu, &phi, MERGE_TOL)?;
            let set = cyclab_core::rohlin::build_cyclic_set(&mu, &phi, &layers)?;
            let check = cyclab_core::rohlin::verify_cyclic_set(&mu, &phi, &layers, &set)?;
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
            write_summary(&out, &value)?;
            println!("mp = {}", report.mp);
            Ok(0)
        }
    }
}

fn generate_cmd(args: GenerateArgs) -> Result<u8> {
    let mu = match args.kind {
        GeneratorKind::Disc => generators::disc_quadrature(args.step, args.normalize)?,
        GeneratorKind::Circle => generators::circle_nodes(args.n)?,
        GeneratorKind::Segment => generators::segment_nodes(args.a, args.b, args.n)?,
        GeneratorKind::Spiral => generators::spiral_nodes(args.t0, args.t1, args.n)?,
        GeneratorKind::Random => generators::random_box(
            args.n,
            (-args.extent, args.extent),
            (-args.extent, args.extent),
            args.seed,
        )?,
    };
    let mu = if args.normalize && args.kind != GeneratorKind::Disc {
        let mass = mu.total_mass();
        cyclab_core::DiscreteMeasure::new(
            mu.points()
                .iter()
                .zip(mu.weights())
                .map(|(&z, &w)| (z, w / mass))
                .collect(),
        )?
    } else {
        mu
    };
    io::write_measure(&args.out, &mu)?;
    println!(
        "wrote {} atoms, total mass {}",
        mu.len(),
        fmt_f64(mu.total_mass())
    );
    Ok(0)
}
