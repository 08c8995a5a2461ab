//! Config-driven experiment runner behind the `burstkin` binary.

pub mod config;
pub mod run;

pub use config::{ConfigError, ExperimentConfig, Mode};
pub use run::{run_experiment, run_sweep, RunError, RunSummary, SweepPoint, SweepSpec};
