//! Closed-loop scenario simulation.

pub mod config;
pub mod export;
pub mod run;
pub mod scenario;

pub use export::{export_csv, export_svg_plots, read_csv, ExportError};
pub use config::{ConfigError, ScenarioConfig, DEFAULT_PROFILE};
pub use run::{run_built, run_scenario, Metrics, Record, RunOutput, SimError, TelemetryLog};
pub use scenario::{sample_inertia, Envelope, Scenario};
