use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chute_core::{ChuteConfig, DualConfig, Variant};

use crate::error::CliError;
use crate::experiment::LambdaSource;

#[derive(Debug, Parser)]
#[command(name = "chute", version, about = "Interval bounds on Pareto optimal outcomes of multi-objective knapsacks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the interval algorithm on one instance.
    Solve(SolveArgs),
    /// Sweep instances, weight vectors, variants and gammas and write tables.
    Experiment(ExperimentArgs),
    /// Exact Chebyshev optima by enumeration, or check a result against them.
    Oracle(OracleArgs),
    /// Merge the shells of stored results into front plot data.
    Front(FrontArgs),
    /// Write a synthetic instance.
    Generate(GenerateArgs),
    /// Start the navigation HTTP service.
    Serve(ServeArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, Args)]
pub struct LambdaArgs {
    /// Weight vector, repeatable.
    #[arg(long = "lambda", value_name = "A,B[,C]", conflicts_with = "lambda_count")]
    pub lambda: Vec<String>,
    /// Number of weight vectors drawn uniformly from the simplex.
    #[arg(long, value_name = "N")]
    pub lambda_count: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

impl LambdaArgs {
    pub fn source(&self) -> Result<LambdaSource, CliError> {
        if let Some(count) = self.lambda_count {
            return Ok(LambdaSource::Sampled { count, seed: self.seed });
        }
        if self.lambda.is_empty() {
            return Err(CliError::input("one of --lambda or --lambda-count is required"));
        }
        self.lambda
            .iter()
            .map(|s| parse_vector(s, "--lambda"))
            .collect::<Result<_, _>>()
            .map(LambdaSource::Explicit)
    }
}

pub fn parse_vector(s: &str, flag: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| CliError::input(format!("{flag} {s:?}: {e}")))
        })
        .collect()
}

#[derive(Clone, Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_delimiter = ',', default_value = "chute1")]
    pub variant: Vec<Variant>,
    #[arg(long, value_delimiter = ',', default_value = "10")]
    pub gamma: Vec<f64>,
    /// Incumbent deadline in seconds.
    #[arg(long, default_value_t = 5.0)]
    pub tl: f64,
    /// Dual search deadline in seconds.
    #[arg(long, default_value_t = 2.0)]
    pub ts: f64,
    /// Dual search stall limit.
    #[arg(long, default_value_t = 20)]
    pub n_stall: u32,
    #[arg(long, default_value_t = chute_core::DEFAULT_RHO)]
    pub rho: f64,
    /// Added to proven objective maxima when estimating y*.
    #[arg(long, default_value_t = chute_core::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Deadline per objective when estimating y*; defaults to --tl.
    #[arg(long)]
    pub ty: Option<f64>,
    /// Reference point to use instead of estimating it.
    #[arg(long, value_name = "Y1,Y2[,Y3]")]
    pub y_star: Option<String>,
    /// Node budget for the incumbent solve.
    #[arg(long)]
    pub node_limit: Option<u64>,
    /// Seconds per target objective for the probing loop.
    #[arg(long)]
    pub shell_deadline: Option<f64>,
    /// Seconds per relaxation solve in the probing loop.
    #[arg(long)]
    pub probe_deadline: Option<f64>,
    /// Zero every wall-clock field in the output.
    #[arg(long)]
    pub mask_timings: bool,
}

impl Default for RunArgs {
    fn default() -> Self {
        Self {
            variant: vec![Variant::Chute1],
            gamma: vec![10.0],
            tl: 5.0,
            ts: 2.0,
            n_stall: 20,
            rho: chute_core::DEFAULT_RHO,
            epsilon: chute_core::DEFAULT_EPSILON,
            ty: None,
            y_star: None,
            node_limit: None,
            shell_deadline: None,
            probe_deadline: None,
            mask_timings: false,
        }
    }
}

impl RunArgs {
    /// Configuration for the first variant and gamma; sweeps overwrite both.
    pub fn config(&self) -> ChuteConfig {
        ChuteConfig {
            variant: self.variant.first().copied().unwrap_or_default(),
            tl: self.tl,
            gamma: self.gamma.first().copied().unwrap_or(10.0),
            rho: self.rho,
            dual: DualConfig::new(self.n_stall, self.ts),
            incumbent_node_limit: self.node_limit,
            shell_deadline: self.shell_deadline,
            probe_deadline: self.probe_deadline,
            floor: None,
            parallel: true,
        }
    }

    pub fn y_star(&self) -> Result<Option<Vec<f64>>, CliError> {
        self.y_star.as_deref().map(|s| parse_vector(s, "--y-star")).transpose()
    }

    pub fn ty(&self) -> f64 {
        self.ty.unwrap_or(self.tl)
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[command(flatten)]
    pub lambda: LambdaArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Result file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the dual search iterations as JSON lines (chute2).
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Instance file, repeatable.
    #[arg(long, required = true)]
    pub instance: Vec<PathBuf>,
    #[command(flatten)]
    pub lambda: LambdaArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// `json` also writes `results.json` next to the CSV tables.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads; all cores when absent.
    #[arg(long, env = "CHUTE_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[command(flatten)]
    pub lambda: LambdaArgs,
    #[arg(long, default_value_t = chute_core::DEFAULT_RHO)]
    pub rho: f64,
    #[arg(long, default_value_t = chute_core::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Deadline per objective when estimating y*.
    #[arg(long, default_value_t = 5.0)]
    pub ty: f64,
    #[arg(long, value_name = "Y1,Y2[,Y3]")]
    pub y_star: Option<String>,
    /// Result file to check; exit code 1 when a bound is violated.
    #[arg(long, value_name = "RESULT")]
    pub check: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FrontArgs {
    /// Result files: single results, arrays of results, or experiment `results.json`.
    #[arg(required = true)]
    pub results: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub coeff_min: u32,
    #[arg(long, default_value_t = 100)]
    pub coeff_max: u32,
    #[arg(long, default_value_t = 0.5)]
    pub tightness: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub bind: String,
    /// Directory for instances and session logs.
    #[arg(long, default_value = "chute-data")]
    pub data: PathBuf,
    /// Largest incumbent deadline a request may ask for, in seconds.
    #[arg(long, default_value_t = 60.0)]
    pub max_tl: f64,
    /// Pending navigations per session before requests are refused.
    #[arg(long, default_value_t = 8)]
    pub queue: usize,
}
