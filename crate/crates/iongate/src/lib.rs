//! Batch runner for iongate-core experiments: JSON configs in, CSV tables
//! and JSON summaries out.

pub mod catalog;
pub mod config;
pub mod error;
pub mod run;

pub use catalog::{bundled_config, list_experiments, CatalogEntry};
pub use config::{ExperimentConfig, ExperimentKind, SCHEMA_VERSION};
pub use error::RunError;
pub use run::{parse_config, run_config, RunOptions, RunOutcome};

/// The config JSON schema.
pub const CONFIG_SCHEMA: &str = include_str!("../schema/experiment-config.v1.json");
