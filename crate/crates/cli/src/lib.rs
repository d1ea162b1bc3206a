//! Command-line wiring for `recipe-adapt`: run configuration, provider
//! construction and the `ingest`, `adapt`, `evaluate` and `probe` commands.

pub mod cli;
pub mod commands;
pub mod config;
pub mod providers;

pub use cli::{run, Cli};
pub use config::{Overrides, ProviderConfig, RunConfig};
