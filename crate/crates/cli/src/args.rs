use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "exmart",
    version,
    about = "Change detection in labeled streams with exchangeability martingales"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a detection experiment, optionally sweeping lambda over replicas.
    Run(RunArgs),
    /// Write a synthetic scenario stream as labeled CSV plus a `.changes` file.
    Generate(GenerateArgs),
    /// Threshold and false-alarm bound for a target test size and power.
    Design(DesignArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrangenessKind {
    Knn,
    Svm,
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    /// A, B, C, D, E, csv or recipe. Inferred from --input / --recipe when omitted.
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub segments: usize,
    #[arg(long, default_value_t = 1000)]
    pub segment_len: usize,
    /// Feature dimension (scenarios D and E only).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Percentage of labels flipped; defaults to the scenario's setting.
    #[arg(long)]
    pub noise_pct: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub stream: StreamArgs,
    /// Labeled CSV stream (scenario csv).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Segment recipe in TOML (scenario recipe).
    #[arg(long)]
    pub recipe: Option<PathBuf>,
    #[arg(long, default_value = "label")]
    pub label_col: String,
    /// Detection threshold; repeat to sweep.
    #[arg(long = "lambda", required = true)]
    pub lambdas: Vec<f64>,
    #[arg(long, default_value_t = exmart_core::DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = StrangenessKind::Knn)]
    pub strangeness: StrangenessKind,
    /// Neighbors per class for knn strangeness.
    #[arg(long)]
    pub k: Option<usize>,
    /// Gaussian kernel width for svm strangeness (default 1/dim).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Box constraint for svm strangeness.
    #[arg(long)]
    pub c: Option<f64>,
    /// Retrain the svm every this many points.
    #[arg(long)]
    pub retrain_every: Option<usize>,
    /// Keep at most this many points in the bag.
    #[arg(long)]
    pub window_cap: Option<usize>,
    #[arg(long, default_value_t = 20)]
    pub replicas: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Write a per-point trajectory CSV for every run.
    #[arg(long)]
    pub emit_trajectory: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub stream: StreamArgs,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// Target false-alarm probability.
    #[arg(long)]
    pub alpha: f64,
    /// Target miss probability.
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
}
