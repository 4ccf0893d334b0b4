//! Experiment driver and analysis harness: closed-form probabilities,
//! Monte-Carlo estimation, privacy testing, and machine-readable outputs for
//! the rank-metric retrieval toolkit.

pub mod config;
pub mod experiments;
pub mod forms;
pub mod presets;

pub use config::{ConfigError, ExperimentConfig};
pub use experiments::{HarnessError, ResultRow};
pub use forms::{closed_forms, ClosedForms};
