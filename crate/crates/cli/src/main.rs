//! `sphereforge` command-line tool.
//!
//! Exit codes: 0 on success (an infeasibility certificate is a success),
//! 1 when a solver does not converge, a verification fails or a run breaks
//! down numerically, 2 on usage and input errors.

mod artifacts;
mod commands;
mod inputs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sphereforge::Error;

#[derive(Debug, Parser)]
#[command(name = "sphereforge", version, about = "Moment-matching designs and SQ hard instances")]
struct Cli {
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, global = true, env = "SPHEREFORGE_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Move points to an equal-weight design for every odd degree up to t.
    DesignUniform(DesignUniformArgs),
    /// Solve for nonnegative weights cancelling odd moments below k.
    DesignWeighted(DesignWeightedArgs),
    /// Re-check any artifact; with --k or --t, report design residuals.
    Verify(VerifyArgs),
    /// Embed a design into R^n and draw labeled samples.
    Instance(InstanceArgs),
    /// Draw samples from a stored instance or from the null.
    Sample(SampleArgs),
    /// Run low-degree Hermite distinguishers against one instance.
    Sq(SqArgs),
    /// Detection rates over fresh random embeddings of a design.
    Power(PowerArgs),
}

#[derive(Debug, Args)]
pub struct DesignUniformArgs {
    /// Ambient dimension (points live on S^{d-1}).
    #[arg(long)]
    pub d: Option<usize>,
    /// Odd design degree.
    #[arg(long)]
    pub t: u32,
    /// Number of points.
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Start from these points instead of seeded uniform ones.
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// Perturbation step; defaults to 1/N_{2t,d}^2.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub damping: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iterations: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DesignWeightedArgs {
    /// Point file (one point per line) or a design record.
    #[arg(long, conflicts_with = "circle", required_unless_present = "circle")]
    pub points: Option<PathBuf>,
    /// Emit the evenly spaced circle design with this odd number of points.
    #[arg(long)]
    pub circle: Option<usize>,
    /// Cancel odd moments of degree < k.
    #[arg(long, required_unless_present = "circle")]
    pub k: Option<u32>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub file: PathBuf,
    /// Check odd degrees < k.
    #[arg(long, conflicts_with = "t")]
    pub k: Option<u32>,
    /// Check odd degrees <= t.
    #[arg(long)]
    pub t: Option<u32>,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Also write the residual report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    #[arg(long)]
    pub design: PathBuf,
    /// Ambient dimension.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub count: usize,
    /// Instance metadata record.
    #[arg(long)]
    pub out: PathBuf,
    /// Sample CSV.
    #[arg(long)]
    pub samples: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, required_unless_present = "null_dim")]
    pub instance: Option<PathBuf>,
    /// Sample the null N(0, I_n) x U{±1} in this dimension instead.
    #[arg(long = "null", value_name = "N", conflicts_with = "instance")]
    pub null_dim: Option<usize>,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Distinguisher degrees, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub degrees: Vec<u32>,
    /// `sampled` or `adversarial`.
    #[arg(long, default_value = "sampled")]
    pub mode: String,
    /// Samples per sampled-mode report.
    #[arg(long, default_value_t = 1_000_000)]
    pub budget: u64,
    /// Adversarial tolerance; defaults to the Hoeffding tolerance of the budget.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SqArgs {
    #[arg(long, required_unless_present = "null_dim")]
    pub instance: Option<PathBuf>,
    /// Query the null in this dimension instead.
    #[arg(long = "null", value_name = "N", conflicts_with = "instance")]
    pub null_dim: Option<usize>,
    #[command(flatten)]
    pub oracle: OracleArgs,
    /// Report record.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-statistic CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    #[arg(long, required_unless_present = "null")]
    pub design: Option<PathBuf>,
    /// Ambient dimension.
    #[arg(long)]
    pub n: usize,
    /// Run against the null instead of the design.
    #[arg(long, conflicts_with = "design")]
    pub null: bool,
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    #[command(flatten)]
    pub oracle: OracleArgs,
    /// Power table CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a record with the table and its provenance.
    #[arg(long)]
    pub record: Option<PathBuf>,
}

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        CliError { code: 2, error: error.into() }
    }

    pub fn failure(error: impl Into<anyhow::Error>) -> Self {
        CliError { code: 1, error: error.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::IllConditioned { .. }
            | Error::Degenerate(_)
            | Error::NoExactExpectation
            | Error::UnboundedQuery(_)
            | Error::Io(_) => CliError::failure(e),
            _ => CliError::usage(e),
        }
    }
}

pub type CliResult = Result<ExitCode, CliError>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::DesignUniform(a) => commands::design_uniform(a),
        Command::DesignWeighted(a) => commands::design_weighted(a),
        Command::Verify(a) => commands::verify(a),
        Command::Instance(a) => commands::instance(a),
        Command::Sample(a) => commands::sample(a),
        Command::Sq(a) => commands::sq(a),
        Command::Power(a) => commands::power(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.code)
        }
    }
}
