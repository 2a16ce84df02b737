use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "lphvg", version, about = "Limited penetrable horizontal visibility graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated series to series.csv.
    Generate(GenerateArgs),
    /// Build the graph of a CSV series.
    Build(BuildArgs),
    /// Compare an i.i.d. ensemble against the closed-form predictions.
    Verify(VerifyArgs),
    /// Decide whether a series is consistent with i.i.d. noise.
    Discriminate(DiscriminateArgs),
    /// Sliding-window distance, correlation and recurrence matrices.
    Evolve(EvolveArgs),
    /// Tabulate the closed-form predictions.
    Theory(TheoryArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Uniform,
    Gaussian,
    Powerlaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    Logistic,
    Henon,
    Lorenz,
    Energy,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphFormat {
    Edges,
    Matrix,
}

/// Where a generated series comes from.
#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SignalArgs {
    /// i.i.d. marginal distribution.
    #[arg(long, value_enum, conflicts_with = "system")]
    pub family: Option<Family>,
    /// Deterministic or periodic source.
    #[arg(long, value_enum)]
    pub system: Option<System>,
    /// Flat `key = value` generator spec; replaces the other signal flags.
    #[arg(long, conflicts_with_all = ["family", "system"])]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 3000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mean: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sd: f64,
    /// Power-law density exponent.
    #[arg(long, default_value_t = 2.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub xmin: f64,
    /// Period of `--system periodic`.
    #[arg(long)]
    pub period: Option<usize>,
    /// Initial state; seeded from `--seed` when absent.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub init: Vec<f64>,
    /// System parameter override, `name=value`; repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    #[serde(rename = "param")]
    pub params: Vec<String>,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Integration steps dropped before recording (flows default to 10000).
    #[arg(long)]
    pub transient: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    #[arg(long, value_enum, default_value_t = Axis::X)]
    pub component: Axis,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct InputArgs {
    /// CSV file holding the series.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Value column: zero-based index or header name.
    #[arg(long, default_value = "0")]
    pub column: String,
    /// Whether the first row is a header.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub header: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GenerateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub signal: SignalArgs,
    #[arg(long)]
    #[serde(skip)]
    pub outdir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct BuildArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 1)]
    pub rho: usize,
    #[arg(long, value_enum, default_value_t = GraphFormat::Edges)]
    pub format: GraphFormat,
    #[arg(long)]
    #[serde(skip)]
    pub outdir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    pub rho: usize,
    #[arg(long, default_value_t = 3000)]
    pub n: usize,
    /// Number of realizations.
    #[arg(long, default_value_t = 10)]
    pub seeds: usize,
    #[arg(long, value_enum, default_value_t = Family::Uniform)]
    pub family: Family,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mean: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sd: f64,
    #[arg(long, default_value_t = 2.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub xmin: f64,
    /// Base seed; realization `s` uses stream `s`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest separation in the long-range table.
    #[arg(long, default_value_t = 30)]
    pub max_sep: usize,
    #[arg(long)]
    #[serde(skip)]
    pub outdir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct DiscriminateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub signal: SignalArgs,
    #[arg(long, default_value_t = 1)]
    pub rho: usize,
    #[arg(long)]
    #[serde(skip)]
    pub outdir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct EvolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 2)]
    pub rho: usize,
    #[arg(long, default_value_t = 500)]
    pub window_len: usize,
    #[arg(long, default_value_t = 100)]
    pub step: usize,
    /// Seed of the random reference ensemble.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of random reference series.
    #[arg(long, default_value_t = 10)]
    pub ensemble: usize,
    #[arg(long)]
    #[serde(skip)]
    pub outdir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct TheoryArgs {
    #[arg(long, default_value_t = 1)]
    pub rho: usize,
    /// Largest degree tabulated.
    #[arg(long, default_value_t = 40)]
    pub kmax: usize,
    #[arg(long, default_value_t = 30)]
    pub max_sep: usize,
    /// Also report the mean degree of a series with this period.
    #[arg(long)]
    pub period: Option<usize>,
    /// Evaluate clustering bounds for rho > 2 as well.
    #[arg(long, default_value_t = false, action = ArgAction::Set)]
    pub allow_unvalidated: bool,
    #[arg(long)]
    #[serde(skip)]
    pub outdir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub outdir: PathBuf,
}
