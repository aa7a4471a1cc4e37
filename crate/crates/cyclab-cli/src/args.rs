use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "cyclab",
    version,
    about = "Weighted polynomial approximation on discrete planar measures: \
             density profiles, slit decompositions, cyclic weights, and \
             multiplicity analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Measure tooling: validate, pushforward, reweight
    Measure {
        #[command(subcommand)]
        cmd: MeasureCmd,
    },
    /// Best-approximation residual profile against a degree schedule
    Approx(ApproxArgs),
    /// Gaussian-weight scheme: Taylor/Stirling bounds and grid fits
    Gauss {
        #[command(subcommand)]
        cmd: GaussCmd,
    },
    /// Slit decompositions of a grid-discretized measure
    Alpha {
        #[command(subcommand)]
        cmd: AlphaCmd,
    },
    /// Cyclic weights and cyclicity tests
    Cyclic {
        #[command(subcommand)]
        cmd: CyclicCmd,
    },
    /// Rohlin layers, local multiplicity, cyclic sets
    Mult {
        #[command(subcommand)]
        cmd: MultCmd,
    },
    /// Write a generated measure to a file
    Generate(GenerateArgs),
    /// Run a named experiment preset
    Preset(PresetArgs),
    /// Run a pipeline from a config file
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand)]
pub enum MeasureCmd {
    /// Load a measure file and report atom count and total mass
    Validate {
        #[arg(long)]
        measure: PathBuf,
    },
    /// Pushforward of the measure under a sampled map
    Pushforward {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// absolute tolerance for identifying values
        #[arg(long, default_value_t = 1e-12)]
        merge_tol: f64,
    },
    /// Transfer measure: weights wᵢ·|hᵢ|ᵖ
    Reweight {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
pub struct ApproxArgs {
    #[arg(long)]
    pub measure: PathBuf,
    #[arg(long = "fn")]
    pub function: PathBuf,
    /// "sup" or a positive exponent p
    #[arg(long, default_value = "2")]
    pub norm: String,
    #[arg(long, default_value_t = 32)]
    pub degree_max: usize,
    #[arg(long)]
    pub weight_fn: Option<PathBuf>,
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridTarget {
    /// max(0, 1 − |x|)
    Hat,
    /// e^{−|x|²}
    Gaussian,
}

#[derive(Subcommand)]
pub enum GaussCmd {
    /// Lagrange bound and Stirling cap for the k-th Taylor remainder
    Bound {
        #[arg(long)]
        k: u64,
        /// also grid-check the remainder sup (k ≤ 200)
        #[arg(long)]
        verify: bool,
    },
    /// Sample a reference target on a uniform grid file
    Sample {
        #[arg(long, value_enum)]
        target: GridTarget,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 3.0)]
        extent: f64,
        #[arg(long, default_value_t = 0.3)]
        step: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sup-norm fit of p·e^{−c|x|²} to grid samples
    Approx {
        #[arg(long)]
        target: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 24)]
        degree_max: usize,
        #[arg(long, default_value_t = 80)]
        lawson_iters: usize,
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Subcommand)]
pub enum AlphaCmd {
    /// Build the slit decomposition and write it with certificates
    Decompose {
        #[arg(long)]
        measure: PathBuf,
        /// grid as nx,ny,step; the rectangle is centered on the atoms
        #[arg(long)]
        grid: String,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
pub enum CyclicCmd {
    /// Build the weight ρ from a decomposition and conjugate approximants
    BuildRho {
        #[arg(long)]
        decomp: PathBuf,
        #[arg(long)]
        measure: PathBuf,
        /// degree cap for the per-level conjugate fits
        #[arg(long, default_value_t = 8)]
        q_degree_cap: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Weighted density profiles and the cyclicity verdict (exit 2 when not
    /// cyclic at the given degree and tolerance)
    Test {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        weight_fn: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 30)]
        degree_max: usize,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = 8)]
        indicators: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Subcommand)]
pub enum MultCmd {
    /// Rohlin layers, local multiplicity table, and cyclic-set verification
    Analyze {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long = "fn")]
        function: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorKind {
    Disc,
    Circle,
    Segment,
    Spiral,
    Random,
}

#[derive(Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: GeneratorKind,
    /// disc: cell side
    #[arg(long, default_value_t = 0.015625)]
    pub step: f64,
    /// circle / segment / spiral / random: node or atom count
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    /// segment endpoints
    #[arg(long, default_value_t = 0.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// spiral parameter range
    #[arg(long, default_value_t = -3.0)]
    pub t0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t1: f64,
    /// random: box half-width and seed
    #[arg(long, default_value_t = 1.0)]
    pub extent: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// rescale to a probability measure
    #[arg(long)]
    pub normalize: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetName {
    Bergman,
    Circle,
    Stirling,
    Spiral,
    MultiplicityDemo,
}

#[derive(Args)]
pub struct PresetArgs {
    #[arg(value_enum)]
    pub name: PresetName,
    #[arg(long, default_value = "cyclab-out")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
