//! Named experiment presets: fixed configs run through the pipeline, so a
//! preset rerun with the same seed produces byte-identical reports.

use cyclab_core::Result;

use crate::args::{PresetArgs, PresetName};
use crate::pipeline::{run_pipeline, ExperimentConfig, FnSpec, GeneratorSpec, Stage};

pub fn preset_config(name: PresetName, out_dir: std::path::PathBuf, seed: u64) -> ExperimentConfig {
    match name {
        // Flat residual curve of z̄ on the disc: the continuous-weight
        // obstruction at the Bergman distance √(1/2).
        PresetName::Bergman => ExperimentConfig {
            seed,
            out_dir,
            generator: GeneratorSpec::Disc {
                step: 1.0 / 64.0,
                normalized: true,
            },
            pipeline: vec![Stage::Approx {
                target: FnSpec::Conj,
                norm: "2".into(),
                degree_max: 30,
                weight: None,
                report: "bergman.csv".into(),
            }],
        },
        // z̄ on the unit circle: residual pinned at 1 by Fourier
        // orthogonality, for every degree.
        PresetName::Circle => ExperimentConfig {
            seed,
            out_dir,
            generator: GeneratorSpec::Circle { n: 512 },
            pipeline: vec![Stage::Approx {
                target: FnSpec::Conj,
                norm: "2".into(),
                degree_max: 40,
                weight: None,
                report: "circle.csv".into(),
            }],
        },
        // Taylor remainder bounds against the Stirling cap, grid-verified.
        PresetName::Stirling => ExperimentConfig {
            seed,
            out_dir,
            generator: GeneratorSpec::Segment {
                a: 0.0,
                b: 1.0,
                n: 2,
            },
            pipeline: vec![Stage::GaussBound {
                k_max: 60,
                verify_max: Some(60),
                report: "stirling.csv".into(),
            }],
        },
        // The spiral is thin enough for z̄: the Gaussian weight is cyclic and
        // the smooth-target residual curves fall below 1e-3 by degree 30.
        // Indicator spikes need degree ~ n and are left to `cyclic test`.
        PresetName::Spiral => ExperimentConfig {
            seed,
            out_dir,
            generator: GeneratorSpec::Spiral {
                t0: -3.0,
                t1: 1.0,
                n: 400,
            },
            pipeline: vec![Stage::CyclicTest {
                weight: FnSpec::ExpNegAbsSq,
                p: 2.0,
                degree_max: 30,
                tol: 1e-3,
                indicators: 0,
                report: "spiral.csv".into(),
            }],
        },
        // The worked two-layer instance: multiplicity 2, a two-element
        // cyclic set, and the exact single-generator obstruction ½.
        PresetName::MultiplicityDemo => ExperimentConfig {
            seed,
            out_dir,
            generator: GeneratorSpec::Segment {
                a: 0.0,
                b: 3.0,
                n: 4,
            },
            pipeline: vec![
                Stage::Mult {
                    phi: FnSpec::Values {
                        values: vec![(1.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)],
                    },
                    out: "multiplicity.json".into(),
                },
                Stage::Insufficiency {
                    phi: FnSpec::Values {
                        values: vec![(1.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)],
                    },
                    d: 1,
                    trials: 8,
                    out: "insufficiency.json".into(),
                },
            ],
        },
    }
}

pub fn run_preset(args: PresetArgs) -> Result<u8> {
    let config = preset_config(args.name, args.out_dir, args.seed);
    run_pipeline(&config)
}
