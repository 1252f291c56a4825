//! `slewsim`: envelope analysis, gain synthesis, closed-loop runs and Monte Carlo campaigns.

mod commands;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(
    name = "slewsim",
    version,
    about = "Constrained attitude slew simulator for reaction-wheel spacecraft",
    long_about = None,
    propagate_version = true
)]
pub struct Cli {
    /// Print progress and written files to stderr
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inscribed momentum and torque radii of the wheel cluster and the derived rate ceiling
    Envelope(ScenarioArgs),
    /// Switching-gain synthesis report and torque feasibility check
    Gains(GainsArgs),
    /// Run one closed-loop maneuver and write telemetry and plots
    Simulate(SimulateArgs),
    /// Run a randomized robustness campaign
    Campaign(CampaignArgs),
    /// Summarize an output directory written by `simulate` or `campaign`
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario file (TOML), or `default` for the built-in profile
    #[arg(short, long, value_name = "PATH", default_value = "default")]
    pub config: String,

    /// Override a scenario value, e.g. `--set controller.gamma=3e-4` (repeatable)
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct GainsArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    /// Output format
    #[arg(short, long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    /// Output directory for telemetry.csv, metrics.json, scenario.toml and plots
    #[arg(short, long, value_name = "DIR", default_value = "runs/nominal")]
    pub out: PathBuf,

    /// Skip the SVG plots
    #[arg(long)]
    pub no_plots: bool,
}

#[derive(Debug, Args)]
pub struct CampaignArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,

    /// Number of randomized runs
    #[arg(short = 'n', long, value_name = "N", default_value_t = 100)]
    pub runs: usize,

    /// Campaign seed [default: the scenario seed]
    #[arg(long, value_name = "SEED")]
    pub seed: Option<u64>,

    /// Worker threads [default: available parallelism]
    #[arg(short, long, value_name = "N")]
    pub workers: Option<usize>,

    /// Keep the initial rate at its scenario value instead of randomizing it
    #[arg(long)]
    pub rest_to_rest: bool,

    /// Output directory for the summary, per-run table, histogram and band plots
    #[arg(short, long, value_name = "DIR", default_value = "runs/campaign")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory written by `simulate` or `campaign`
    #[arg(value_name = "DIR")]
    pub dir: PathBuf,

    /// Regenerate the SVG plots of a `simulate` directory
    #[arg(long)]
    pub plots: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
