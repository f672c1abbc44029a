use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use parity_spectrum::estimators::Outcome;
use parity_spectrum::model::BnSpec;

#[derive(Debug, Parser)]
#[command(
    name = "parity-spectrum",
    version,
    about = "Causal decomposition and business-necessity audits of statistical and predictive parity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// SPM, iPPM and the counterfactual DE/IE/SE with bootstrap intervals.
    Effects(EffectsArgs),
    /// Business Necessity Cookbook audit of a predictor column.
    Audit(AuditArgs),
    /// Sample a unit panel (factual and counterfactual values) from an SCM.
    Simulate(SimulateArgs),
    /// Split the predictive-parity gap of a fitted learner into Terms I/II/III.
    #[command(name = "verify-pp")]
    VerifyPp(VerifyPpArgs),
    /// SPM vs iPPM of fair-adjusted predictors across business-necessity sets.
    Pareto(ParetoArgs),
}

fn parse_outcome(s: &str) -> Result<Outcome, String> {
    Outcome::parse(s).map_err(|e| e.to_string())
}

fn parse_bn(s: &str) -> Result<BnSpec, String> {
    s.parse::<BnSpec>().map_err(|e| e.to_string())
}

fn parse_level(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v < 1.0 => Ok(v),
        _ => Err(format!("confidence level must lie in (0, 1), got `{s}`")),
    }
}

/// Dataset CSV plus its schema sidecar.
#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Schema file (TOML keys x, x0, x1, z, w, y, yhat; optional y_level, bin).
    #[arg(long)]
    pub schema: PathBuf,
    /// Quantile bins for the numeric columns listed under `bin`.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(2..))]
    pub bins: u64,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct BootstrapArgs {
    /// Bootstrap replicates (0 for point estimates only).
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0.95, value_parser = parse_level)]
    pub level: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EffectsArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Outcome as column=level.
    #[arg(long, value_parser = parse_outcome)]
    pub outcome: Outcome,
    /// Predictor column whose effects and iPPM are also reported.
    #[arg(long)]
    pub yhat: Option<String>,
    #[command(flatten)]
    pub bootstrap: BootstrapArgs,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Predictor column to audit.
    #[arg(long)]
    pub yhat: String,
    /// Business-necessity vector ordered DE, IE, SE, e.g. 001.
    #[arg(long, value_parser = parse_bn)]
    pub bn: BnSpec,
    /// Outcome as y=level; defaults to the schema's y_level, then "1".
    #[arg(long, value_parser = parse_outcome)]
    pub outcome: Option<Outcome>,
    #[command(flatten)]
    pub bootstrap: BootstrapArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// SCM spec file, or the name of a built-in model.
    #[arg(long)]
    pub scm: String,
    /// Number of units.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Learner {
    /// Cell means over quantile-binned features.
    Cells,
    /// Ordinary least squares.
    Linear,
}

#[derive(Debug, Args)]
pub struct VerifyPpArgs {
    #[arg(long, default_value = "gaussian-mediators")]
    pub scm: String,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Predictor bins; the cell learner uses the same count per feature.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(2..))]
    pub bins: u64,
    #[arg(long, value_enum, default_value_t = Learner::Cells)]
    pub learner: Learner,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ParetoArgs {
    /// CSV dataset; without it a sample of --scm is used.
    #[arg(long, requires = "schema")]
    pub data: Option<PathBuf>,
    #[arg(long, requires = "data")]
    pub schema: Option<PathBuf>,
    #[arg(long, default_value = "full-sfm", conflicts_with = "data")]
    pub scm: String,
    #[arg(long, default_value_t = 20_000)]
    pub n: usize,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(2..))]
    pub bins: u64,
    /// Comma-separated business-necessity vectors.
    #[arg(long, value_delimiter = ',', value_parser = parse_bn, default_value = "000,001,010,011")]
    pub bn_sets: Vec<BnSpec>,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    #[arg(long, value_parser = parse_outcome)]
    pub outcome: Option<Outcome>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
