//! Declarative experiment runner.

pub mod config;
pub mod run;
pub mod suite;

pub use config::{CheckName, ExperimentConfig};
pub use run::{emit_curves, run_config, CheckReport, Curve, RunReport, Timings};
