//! Configuration-driven experiments on cracked elastic bodies.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::ExperimentConfig;
pub use error::CliError;
