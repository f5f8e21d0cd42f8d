use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "bvsel",
    version,
    about = "Adaptive MCMC for Bayesian variable selection in the normal linear model",
    args_override_self = true
)]
pub struct Cli {
    /// Worker threads (default: all available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Flat `key = value` file whose keys mirror the long flags; flags given
    /// on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset with AR(1)-correlated covariates.
    Simulate(SimulateArgs),
    /// Run one sampler and write PIPs, a summary and optionally a trace.
    Run(RunArgs),
    /// Replicate two samplers and report their relative efficiency.
    Compare(CompareArgs),
    /// Exact posterior by enumerating every model (p <= 20).
    Enumerate(EnumerateArgs),
    /// Check simulated product-target chains against closed forms.
    IdealizedCheck(IdealizedArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    #[arg(long, default_value_t = 0.6)]
    pub rho: f64,
    #[arg(long, default_value_t = 2.0)]
    pub snr: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Drawn from the OS when omitted; the value used is written to truth.json.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for data.csv and truth.json.
    #[arg(long, default_value = "bvsel-data")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Header-first numeric CSV.
    #[arg(long, value_name = "FILE")]
    pub data: PathBuf,
    /// Name of the response column.
    #[arg(long, default_value = "y")]
    pub response: String,
    /// Centre and scale the covariates before analysis.
    #[arg(long)]
    pub standardize: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PriorArgs {
    /// Fixed slab scale g (V_gamma = g I).
    #[arg(long, default_value_t = 9.0, conflicts_with = "g_half_cauchy")]
    pub g: f64,
    /// Put a half-Cauchy prior with this scale on g instead.
    #[arg(long, value_name = "SCALE")]
    pub g_half_cauchy: Option<f64>,
    /// Prior inclusion probability (default: min(10 / p, 0.5)).
    #[arg(long, conflicts_with = "h_beta")]
    pub h: Option<f64>,
    /// Beta(a, b) hyperprior on the inclusion probability, as `a,b`.
    #[arg(long, value_name = "A,B")]
    pub h_beta: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Eia,
    Asi,
    Ads,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Eia => "eia",
            Algo::Asi => "asi",
            Algo::Ads => "ads",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Init {
    Empty,
    Prior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Default,
    /// Conditional-row adaptation during burn-in only.
    BigData,
}

#[derive(Debug, Clone, Args)]
pub struct SamplerArgs {
    #[arg(long, value_enum, default_value_t = Algo::Asi)]
    pub algo: Algo,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    #[arg(long, default_value_t = 1000)]
    pub burnin: u64,
    #[arg(long, default_value_t = 10_000)]
    pub iters: u64,
    #[arg(long, default_value_t = 1)]
    pub thin: u64,
    /// Parallel tempering with this many temperatures.
    #[arg(long, value_name = "M")]
    pub pt: Option<usize>,
    /// Target acceptance rate of the scaled adaptation.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub tau_l: Option<f64>,
    #[arg(long)]
    pub tau_u: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Proposal box margin (default 0.1 / p).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Exponent of the adaptation step size i^-lambda.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Stop accumulating conditional inclusion rows after burn-in.
    #[arg(long)]
    pub rb_burnin_only: bool,
    #[arg(long, value_enum, default_value_t = Preset::Default)]
    pub preset: Preset,
    #[arg(long, value_enum, default_value_t = Init::Empty)]
    pub init: Init,
    /// Also accumulate conditional inclusion rows for kernels that do not
    /// need them, so pips.csv carries both estimates.
    #[arg(long)]
    pub rb: bool,
    /// Random-walk step on log g when g has a hyperprior.
    #[arg(long, default_value_t = 0.5)]
    pub g_step: f64,
    /// Allow models with more than n - 2 variables.
    #[arg(long)]
    pub no_rank_guard: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub prior: PriorArgs,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    /// Drawn from the OS when omitted; the value used is recorded in summary.json.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the per-iteration trace.csv.
    #[arg(long)]
    pub trace: bool,
    #[arg(long, default_value = "bvsel-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Budget {
    /// Standardize the variance ratio by median wall-clock time.
    Time,
    /// Compare variances per iteration; times are reported but not used.
    Iterations,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub prior: PriorArgs,
    #[arg(long, value_enum, default_value_t = Algo::Asi)]
    pub algo_a: Algo,
    #[arg(long, value_enum, default_value_t = Algo::Ads)]
    pub algo_b: Algo,
    #[arg(long, default_value_t = 20)]
    pub replicates: usize,
    #[arg(long, default_value_t = 5)]
    pub chains: usize,
    #[arg(long, default_value_t = 500)]
    pub burnin_a: u64,
    #[arg(long, default_value_t = 2500)]
    pub iters_a: u64,
    /// Defaults to the values for A.
    #[arg(long)]
    pub burnin_b: Option<u64>,
    #[arg(long)]
    pub iters_b: Option<u64>,
    #[arg(long, value_enum, default_value_t = Budget::Time)]
    pub budget: Budget,
    #[arg(long)]
    pub rb_burnin_only: bool,
    #[arg(long, value_enum, default_value_t = Init::Empty)]
    pub init: Init,
    /// Base seed from which every replicate seed is derived. Drawn from the OS
    /// when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "bvsel-compare")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Slab scale g.
    #[arg(long, default_value_t = 9.0)]
    pub g: f64,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long, value_name = "A,B")]
    pub h_beta: Option<String>,
    /// Rows of the model table to print and write.
    #[arg(long, default_value_t = 20)]
    pub top: usize,
    #[arg(long)]
    pub no_rank_guard: bool,
    /// Directory for exact_pips.csv and models.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Independent,
    Rw,
    Both,
}

#[derive(Debug, Args)]
pub struct IdealizedArgs {
    #[arg(long, default_value_t = 5)]
    pub p: usize,
    #[arg(long, value_enum, default_value_t = VariantArg::Both)]
    pub variant: VariantArg,
    #[arg(long, default_value_t = 100_000)]
    pub steps: usize,
    /// Comma-separated inclusion probabilities; drawn from (0.05, 0.95)
    /// when omitted.
    #[arg(long, value_name = "P1,P2,...")]
    pub pis: Option<String>,
    /// Fixed by default so that the check is reproducible.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}
