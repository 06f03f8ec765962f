use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod error;
mod output;

use config::{parse_config, RunConfig};
use error::CliError;

/// Noncommutative calculus, warped deformations, curvature and cosmology checks.
///
/// Exit status: 0 on success, 1 when a verification ran and failed, 2 on
/// usage, configuration or input errors.
#[derive(Debug, Parser)]
#[command(name = "warpgeom", version)]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; cosmology defaults to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Human,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the consistency conditions of the configured algebra.
    CheckJacobi,
    /// Deform the flat line element and optional differential words.
    Deform(DeformArgs),
    /// Build a metric of one of the spacetime families.
    Metric(MetricArgs),
    /// Symbolic curvature with a finite-difference cross-check.
    Curvature(CurvatureArgs),
    /// Integrate the deformed Friedmann equation.
    Cosmology(CosmologyArgs),
    /// Solve for the Moyal parameter and test centrality of the metric.
    Centrality(CentralityArgs),
    /// Check the truncated operator representation.
    VerifyOperators(OperatorArgs),
}

#[derive(Debug, Args)]
pub struct DeformArgs {
    /// Differential word to deform, e.g. `dx0*dx1`; repeatable.
    #[arg(long = "word")]
    pub words: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Conformal,
    Ultrastatic,
    Frw,
    DeformedFrw,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Hubble rate for the frw family.
    #[arg(long, allow_negative_numbers = true)]
    pub hubble: Option<f64>,
    /// Spatial dimensions for the frw family.
    #[arg(long)]
    pub spatial_dims: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CurvatureArgs {
    #[command(flatten)]
    pub metric: MetricArgs,
    /// Background scale factor for deformed-frw, e.g. `t^(2/3)` or `exp(0.5*t)`.
    #[arg(long)]
    pub scale_factor: Option<String>,
    /// Random sample points for the finite-difference oracle.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Finite-difference step.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CosmologyArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Matter constant C.
    #[arg(long = "C", alias = "c", allow_negative_numbers = true)]
    pub c: Option<f64>,
    #[arg(long)]
    pub a0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_start: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CentralityArgs {
    /// Spatial dimensions.
    #[arg(long)]
    pub n: Option<usize>,
    /// Common time-space entry Θ_{0j}.
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Truncation order of the series.
    #[arg(long)]
    pub order: Option<u32>,
    /// Exit 1 when the solved Ω leaves nonzero residual components.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct OperatorArgs {
    /// Truncation dimension N.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Algebra scale a.
    #[arg(long, allow_negative_numbers = true)]
    pub scale: Option<f64>,
    /// Weight q of the differential.
    #[arg(long)]
    pub weight: Option<f64>,
    /// Conjugation parameter for the adjoint action.
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    /// Also residuals at 3N/4 and 3N/2 for the convergence trend.
    #[arg(long)]
    pub trend: bool,
    /// Run the slow quadrature comparison (N ≤ 24).
    #[arg(long)]
    pub quadrature: bool,
}

/// What a subcommand produced: a document and whether its checks passed.
pub struct Outcome {
    pub body: Artifact,
    pub passed: bool,
}

pub enum Artifact {
    Json(serde_json::Value),
    Text(String),
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    match &cli.config {
        Some(path) => parse_config(path),
        None => Ok(RunConfig::default()),
    }
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = load(cli)?;
    let format = match (cli.format, cfg.output.format.as_deref()) {
        (Some(f), _) => Some(f),
        (None, Some("json")) => Some(Format::Json),
        (None, Some("human")) => Some(Format::Human),
        (None, Some("csv")) => Some(Format::Csv),
        (None, Some(other)) => return Err(CliError::Usage(format!("unknown output format {other:?}"))),
        (None, None) => None,
    };
    let outcome = commands::dispatch(&cli.command, &cfg, format)?;
    let text = match &outcome.body {
        Artifact::Text(t) => t.clone(),
        Artifact::Json(v) if format == Some(Format::Human) => output::to_human(v),
        Artifact::Json(v) => output::to_json_string(v),
    };
    let target = cli.out.clone().or_else(|| cfg.output.path.clone().map(PathBuf::from));
    match target {
        Some(path) => std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(o) if o.passed => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprint!("{}", output::to_json_string(&e.to_json()));
            ExitCode::from(2)
        }
    }
}
