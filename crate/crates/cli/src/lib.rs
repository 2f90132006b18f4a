//! Command-line harness around the `eslcheck` verifier: agent configuration, datasets,
//! batch runs and metrics.

pub mod config;
pub mod dataset;
pub mod metrics;
pub mod runner;

pub use config::{Config, Mode};
pub use dataset::{CaseRecord, Dataset, Manifest};
pub use metrics::{summarize, CaseRow, LlmVerdict, Summary};
pub use runner::{run_dataset, RunOptions};
