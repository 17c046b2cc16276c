use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "crround",
    version,
    about = "Contention resolution for uniform and partition matroids"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub global: GlobalOpts,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Seed for every random stream of the run.
    #[arg(long, global = true, env = "CRROUND_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Output format; defaults to `pretty` on a terminal and `json` otherwise.
    #[arg(long, global = true, env = "CRROUND_FORMAT", value_enum)]
    pub format: Option<Format>,

    /// Omit run metadata (wall time) so identical runs give identical bytes.
    #[arg(long, global = true)]
    pub no_meta: bool,

    #[command(flatten)]
    pub tol: Tolerances,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Debug, Clone, Copy, PartialEq, Args)]
pub struct Tolerances {
    /// Slack allowed on polytope constraints.
    #[arg(long = "tol-polytope", global = true, default_value_t = 1e-9)]
    pub polytope: f64,

    /// Closed-form identities checked against enumeration.
    #[arg(long = "tol-exact", global = true, default_value_t = 1e-9)]
    pub exact: f64,

    /// Agreement of the direct and recursive forms of h.
    #[arg(long = "tol-recursion", global = true, default_value_t = 1e-10)]
    pub recursion: f64,

    /// Gradient against central differences.
    #[arg(long = "tol-gradient", global = true, default_value_t = 1e-6)]
    pub gradient: f64,

    /// Hessian against second differences.
    #[arg(long = "tol-hessian", global = true, default_value_t = 1e-4)]
    pub hessian: f64,

    /// Relative error of the Hessian spectrum.
    #[arg(long = "tol-spectrum", global = true, default_value_t = 1e-9)]
    pub spectrum: f64,

    /// Distance of the grid maximum from the predicted value.
    #[arg(long = "tol-grid-max", global = true, default_value_t = 1e-6)]
    pub grid_max: f64,

    /// Amount by which any grid point may exceed the predicted maximum.
    #[arg(long = "tol-grid-exceed", global = true, default_value_t = 1e-9)]
    pub grid_exceed: f64,

    /// Marginal differences below minus this count as violations.
    #[arg(long = "tol-monotone", global = true, default_value_t = 1e-12)]
    pub monotone: f64,

    /// Width of Monte Carlo checks, in standard errors.
    #[arg(long = "tol-sigma", global = true, default_value_t = 4.0)]
    pub sigma: f64,

    /// Significance level of the sampler fit.
    #[arg(long = "tol-significance", global = true, default_value_t = 1e-3)]
    pub significance: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            polytope: 1e-9,
            exact: 1e-9,
            recursion: 1e-10,
            gradient: 1e-6,
            hessian: 1e-4,
            spectrum: 1e-9,
            grid_max: 1e-6,
            grid_exceed: 1e-9,
            monotone: 1e-12,
            sigma: 4.0,
            significance: 1e-3,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the balancedness c(k, n).
    Table(TableArgs),
    /// Apply the scheme to a realized set, or to sampled R(x).
    Round(RoundArgs),
    /// Run a named verification suite.
    Verify(VerifyArgs),
    /// Estimate per-element balancedness by simulation.
    Estimate(EstimateArgs),
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Ground set sizes, one row each.
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 4, 5, 10, 100, 1000])]
    pub n: Vec<usize>,

    /// Ranks, one column each.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3, 4, 9, 99, 999])]
    pub k: Vec<usize>,

    /// Append the n → ∞ limit of each column.
    #[arg(long)]
    pub limit_row: bool,
}

#[derive(Debug, Args)]
pub struct ConstraintArgs {
    /// Rank of the uniform matroid.
    #[arg(long, conflicts_with = "partition")]
    pub k: Option<usize>,

    /// Partition matroid as consecutive blocks `size:cap,size:cap,..`.
    #[arg(long)]
    pub partition: Option<String>,
}

#[derive(Debug, Args)]
pub struct RoundArgs {
    /// JSON document `{"n", "x", "A"?, "k"?, "partition"?}` or a CSV of x; `-` reads stdin.
    #[arg(long, short)]
    pub input: Option<PathBuf>,

    /// Fractional point as a comma-separated list.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        conflicts_with = "input"
    )]
    pub x: Option<Vec<f64>>,

    /// Realized set; when absent, R(x) is drawn afresh in every trial.
    #[arg(long = "set", value_delimiter = ',')]
    pub set: Option<Vec<usize>>,

    #[command(flatten)]
    pub constraint: ConstraintArgs,

    #[arg(long, default_value_t = 1)]
    pub trials: u64,

    /// Largest number of per-trial rows to emit.
    #[arg(long, default_value_t = 1000)]
    pub max_rows: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Distribution,
    Marginal,
    Recursion,
    DropMaximum,
    DropBound,
    Optimality,
    Monotonicity,
    Hessian,
    AlphaMonotone,
    Partition,
    SamplerFit,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,

    /// Ground set size, for suites that take one.
    #[arg(long)]
    pub n: Option<usize>,

    /// Rank, for suites that take one.
    #[arg(long)]
    pub k: Option<usize>,

    /// Random instances per suite.
    #[arg(long)]
    pub samples: Option<u64>,

    /// Monte Carlo trials per estimate.
    #[arg(long)]
    pub trials: Option<u64>,

    /// Largest n swept by the alpha-monotone suite.
    #[arg(long, default_value_t = 200)]
    pub n_max: usize,

    /// Points per unit of the grid searches.
    #[arg(long, default_value_t = 60)]
    pub resolution: usize,

    /// Partition for the partition suite.
    #[arg(long, default_value = "2:1,3:1,4:2")]
    pub partition: String,

    #[arg(long, default_value_t = 1)]
    pub shards: usize,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Ground set size of the uniform matroid.
    #[arg(long)]
    pub n: Option<usize>,

    #[command(flatten)]
    pub constraint: ConstraintArgs,

    /// `symmetric`, a comma-separated vector, or `random:<count>`.
    #[arg(long, default_value = "symmetric")]
    pub x: String,

    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,

    #[arg(long, default_value_t = 1)]
    pub shards: usize,

    /// Confidence multiplier of the reported intervals.
    #[arg(long, default_value_t = 3.0)]
    pub z: f64,
}
