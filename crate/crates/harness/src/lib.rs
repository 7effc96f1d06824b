//! Experiment harness: configuration, the five study suites, the results
//! cache and report emission.

pub mod cache;
pub mod config;
pub mod error;
pub mod report;
pub mod studies;

pub use cache::Cache;
pub use config::{ExperimentConfig, Mode, Overrides, TestFunctionSpec};
pub use error::{HarnessError, Result};
pub use report::{emit_report, Check, Comparison, ExperimentReport, Format, Row};
pub use studies::{run, Runtime};
