//! Configuration, commands and output plumbing behind the `cherednik-tf` binary.

pub mod app;
pub mod checks;
pub mod commands;
pub mod config;
pub mod output;


pub use commands::{run, Command};
pub use config::{ConfigError, Overrides, RunConfig};
