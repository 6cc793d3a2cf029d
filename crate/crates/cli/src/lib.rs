//! Configuration, ingestion and subcommands behind the `symwin` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod input;

pub use config::Pipeline;
pub use error::{CliError, CliResult};
