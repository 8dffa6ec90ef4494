//! Experiment harness behind the `steersim` binary.

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{parse_config, Arm, ExperimentConfig, PolicyChoice};
pub use experiment::{run_experiment, ArmTable, ExperimentResult, RunSummary, StatsRow};
pub use output::emit_plot_data;
