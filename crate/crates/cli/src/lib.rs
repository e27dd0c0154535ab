//! Configuration-driven experiment runner for the `socbec` binary.

pub mod checkpoint;
pub mod config;
pub mod runner;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CheckpointError};
pub use config::{parse_config, parse_config_in, ConfigError, ExperimentConfig, Mode};
pub use runner::{run, RunError, RunSummary};
