use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub const SEED_ENV: &str = "LOGITBOOT_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "logitboot",
    version,
    about = "Logistic regression with bootstrap intervals and split-sample validation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the model by maximum likelihood and report odds ratios.
    Fit(FitArgs),
    /// Case-resampling bootstrap with Wald, percentile and BCa intervals.
    Bootstrap(BootstrapArgs),
    /// Refit on the first N rows for each requested N.
    Split(SplitArgs),
    /// Fit on a training prefix and score accuracy on the remaining rows.
    Validate(ValidateArgs),
    /// Fitted probability against age for fixed covariate profiles.
    Curves(CurvesArgs),
    /// Draw a synthetic dataset from given coefficients.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Convergence threshold on the largest absolute score component.
    #[arg(long = "tol", default_value_t = 1e-8)]
    pub tolerance: f64,
    #[arg(long = "max-iter", default_value_t = 25)]
    pub max_iterations: usize,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Extra odds multipliers as NAME=DELTA, e.g. Age=15 for exp(15·θ_Age).
    #[arg(long = "scale", value_name = "NAME=DELTA")]
    pub scale: Vec<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CiMethod {
    Wald,
    Percentile,
    Bca,
    All,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub replicates: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "ci-level", default_value_t = 0.95)]
    pub ci_level: f64,
    #[arg(long = "ci-method", value_enum, default_value_t = CiMethod::All)]
    pub ci_method: CiMethod,
    /// Include the full replicate matrix in the output.
    #[arg(long)]
    pub keep_replicates: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = logitboot::validation::DEFAULT_SPLIT_SIZES)]
    pub sizes: Vec<usize>,
    /// Permute rows with this seed before taking prefixes.
    #[arg(long = "shuffle-seed")]
    pub shuffle_seed: Option<u64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long = "train-count", default_value_t = 300)]
    pub train_count: usize,
    #[arg(long, default_value_t = logitboot::validation::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long = "shuffle-seed")]
    pub shuffle_seed: Option<u64>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["coefficients", "fit_json"])))]
pub struct CurvesArgs {
    /// Intercept,Age,Emp,Gender in log-odds.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
    pub coefficients: Option<Vec<f64>>,
    /// JSON written by `logitboot fit`.
    #[arg(long = "fit-json")]
    pub fit_json: Option<PathBuf>,
    #[arg(
        long,
        value_delimiter = ',',
        default_values_t = logitboot::validation::STANDARD_PROFILES.map(String::from)
    )]
    pub profiles: Vec<String>,
    #[arg(long = "age-from", default_value_t = 0.0)]
    pub age_from: f64,
    #[arg(long = "age-to", default_value_t = 120.0)]
    pub age_to: f64,
    #[arg(long = "age-step", default_value_t = 10.0)]
    pub age_step: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Intercept,Age,Emp,Gender in log-odds.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        num_args = 1,
        default_values_t = logitboot::data_io::REFERENCE_COEFFICIENTS
    )]
    pub coefficients: Vec<f64>,
    #[arg(long, default_value_t = 400)]
    pub n: usize,
    #[arg(long = "age-lo", default_value_t = 0.0)]
    pub age_lo: f64,
    #[arg(long = "age-hi", default_value_t = 90.0)]
    pub age_hi: f64,
    /// Probability that Emp = 1 (unemployed).
    #[arg(long = "p-emp", default_value_t = 0.5)]
    pub p_emp: f64,
    /// Probability that Gender = 1 (female).
    #[arg(long = "p-gender", default_value_t = 0.5)]
    pub p_gender: f64,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// CSV destination; without it the CSV goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
