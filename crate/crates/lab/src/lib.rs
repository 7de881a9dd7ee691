//! Experiment runner for `twoweight-core`: configuration, reports, file
//! formats and the reproduction cases behind the `twoweight` binary.

pub mod calibration;
pub mod config;
pub mod experiments;
pub mod formats;
pub mod random;
pub mod report;

pub use config::{Case, ExperimentConfig, OutputFormat, Settings};
pub use experiments::{run, RunError};
pub use report::Report;
