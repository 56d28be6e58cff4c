//! `assoc-bench`: runs the association distance study and its utilities.

pub mod config;
pub mod curve;
pub mod error;
pub mod hypotheses;
pub mod manifest;
pub mod published;
pub mod simulate;
pub mod tables;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use error::{CliError, Result};
pub use manifest::{Job, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "assoc-bench", version, about = "Correct-assignment study for association distances")]
pub struct Cli {
    /// Worker threads for the simulation (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one Monte-Carlo configuration in batches.
    Simulate(SimulateArgs),
    /// Run the full grid and write one CSV per results table.
    Tables(TablesArgs),
    /// Emit both distances for a 1-D innovation over a variance grid.
    Curve(CurveArgs),
    /// Count (and optionally list) joint association hypotheses.
    Hypotheses(HypothesesArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    /// Configuration file (`[scenario]` and `[run]` sections).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub batches: Option<usize>,
    #[arg(long)]
    pub per_batch: Option<usize>,
    /// Falls back to the config file, then $ASSOC_BENCH_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Time step of the kinematic model in seconds.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Regenerate from the manifest embedded in an earlier output.
    #[arg(long, conflicts_with_all = ["config", "batches", "per_batch", "seed", "dt"])]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: ScenarioArgs,
    #[arg(long)]
    pub n_tracks: Option<usize>,
    /// steady | arbitrary
    #[arg(long)]
    pub regime: Option<String>,
    /// h1 | h2 | mixed
    #[arg(long)]
    pub model: Option<String>,
    /// Comma-separated: maha, asso-ll, asso-ll-no-dim.
    #[arg(long)]
    pub distance: Option<String>,
    /// CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON summary path.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TablesArgs {
    #[command(flatten)]
    pub common: ScenarioArgs,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    /// Innovation in meters.
    #[arg(long, default_value_t = 0.7)]
    pub delta_z: f64,
    /// Explicit comma-separated variances; overrides the range flags.
    #[arg(long)]
    pub variances: Option<String>,
    #[arg(long, default_value_t = 0.01)]
    pub min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub max: f64,
    #[arg(long, default_value_t = 0.001)]
    pub step: f64,
    /// CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, conflicts_with_all = ["delta_z", "variances", "min", "max", "step"])]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct HypothesesArgs {
    pub n_tracks: usize,
    pub n_detections: usize,
    /// List every hypothesis ranked by log-probability.
    #[arg(long)]
    pub enumerate: bool,
    /// JSON instance with tracks and measurements; a random toy instance is used otherwise.
    #[arg(long, requires = "enumerate")]
    pub instance: Option<PathBuf>,
    /// Seed of the toy instance.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub pd: Option<f64>,
    #[arg(long)]
    pub beta_fd: Option<f64>,
    #[arg(long)]
    pub beta_nt: Option<f64>,
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::config(format!("--threads: {e}")))?;
    }
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Simulate(args) => simulate::run(&args, &mut stdout),
        Command::Tables(args) => tables::run(&args, &mut stdout),
        Command::Curve(args) => curve::run(&args, &mut stdout),
        Command::Hypotheses(args) => hypotheses::run(&args, &mut stdout),
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub(crate) fn write_stdout(out: &mut dyn std::io::Write, contents: &str) -> Result<()> {
    out.write_all(contents.as_bytes())
        .map_err(|e| CliError::io("<stdout>", e))
}
