//! Argument parsing and the 0/1/2 exit-code contract.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

use crate::commands::{run, Command};
use crate::config::{ConfigError, Overrides, RunConfig};

/// Opdam–Cherednik transform, windowed transform and localization operator checks.
#[derive(Parser)]
#[command(name = "cherednik-tf", version, about)]
struct Cli {
    /// TOML run configuration; the shipped default is used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Overrides the configured cache directory.
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

/// Parses `args` (program name first), runs the command and returns the exit code: 0 on
/// success, 1 when a numerical check fails or a computation errors, 2 for usage and
/// configuration errors.
pub fn main_with<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let ov = Overrides { seed: cli.seed, output_dir: cli.output, cache_dir: cli.cache };
    let cfg = match RunConfig::resolve(cli.config.as_deref(), &ov) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    match run(cli.command, &cfg) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<ConfigError>() {
                EXIT_CONFIG
            } else {
                EXIT_CHECK_FAILED
            }
        }
    }
}
