//! Command-line flags. Every flag is optional so that a TOML config can
//! supply it; flags given on the command line take precedence.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "whitham", version, about = "Traveling waves of the steady Whitham equation")]
pub struct Cli {
    /// TOML file with one table per subcommand, e.g. [solitary].
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate K, its regular part and periodized kernels.
    Kernel(KernelArgs),
    /// Solve for one periodic wave.
    Periodic(PeriodicArgs),
    /// Continue a periodic branch in the relative height.
    Branch(BranchArgs),
    /// Construct a solitary wave by a period sweep.
    Solitary(SolitaryArgs),
    /// Check a wave document against the known bounds and identities.
    Verify(VerifyArgs),
    /// Summarize wave documents as CSV tables.
    Report(ReportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Kernel(_) => "kernel",
            Command::Periodic(_) => "periodic",
            Command::Branch(_) => "branch",
            Command::Solitary(_) => "solitary",
            Command::Verify(_) => "verify",
            Command::Report(_) => "report",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Spatial,
    Fourier,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelArgs {
    /// Periods for the K_P columns.
    #[arg(long, value_delimiter = ',')]
    pub periods: Option<Vec<f64>>,
    #[arg(long)]
    pub xmin: Option<f64>,
    #[arg(long)]
    pub xmax: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub quadrature_tol: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Output CSV file; standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverArgs {
    /// Newton tolerance on the residual ∞-norm.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Smallest λ step before continuation gives up.
    #[arg(long)]
    pub step_floor: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct PeriodicArgs {
    #[arg(long)]
    pub period: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Nodes per period; chosen from λ if absent.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Near-extreme wave on a short period with a fine grid.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub cusp: Option<bool>,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    /// Output prefix; writes PREFIX.json and PREFIX.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct BranchArgs {
    #[arg(long)]
    pub period: Option<f64>,
    /// Increasing relative heights.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SolitaryArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Increasing periods; overrides --pmin/--pmax.
    #[arg(long, value_delimiter = ',')]
    pub schedule: Option<Vec<f64>>,
    /// Smallest period of a doubling schedule.
    #[arg(long)]
    pub pmin: Option<f64>,
    /// Largest period of a doubling schedule.
    #[arg(long)]
    pub pmax: Option<f64>,
    /// Half-width W of the window [−W, W].
    #[arg(long)]
    pub window: Option<f64>,
    /// Convergence tolerance on speeds and windowed profiles.
    #[arg(long)]
    pub sweep_tol: Option<f64>,
    /// Nodes per unit length.
    #[arg(long)]
    pub points_per_unit: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyArgs {
    /// Wave document to check.
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    /// Second solitary wave for the touching check.
    #[arg(long)]
    pub against: Option<PathBuf>,
    /// δ used in the crest term of the speed bound.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub l2_tol: Option<f64>,
    /// Report document path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportArgs {
    /// Solitary or branch documents.
    #[arg(long = "in", num_args = 0..)]
    #[serde(rename = "in")]
    pub inputs: Option<Vec<PathBuf>>,
    /// Output prefix; writes PREFIX.waves.csv and PREFIX.sweeps.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
