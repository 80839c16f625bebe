//! Front end for `races-core`: argument parsing, CSV output, run manifests
//! and the sieve count cache.

pub mod args;
pub mod cache;
pub mod commands;
pub mod error;
pub mod manifest;
pub mod output;

use args::{Cli, Command};
use error::CliError;

/// Runs one parsed invocation. The worker pool is sized here and nowhere else.
pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let manifest = cli.manifest.as_deref();
    match &cli.command {
        Command::Race(a) => commands::race(a, manifest),
        Command::Zeros(a) => commands::zeros(a, manifest),
        Command::Density(a) => commands::density(a, manifest),
        Command::Signchange(a) => commands::signchange(a, manifest),
        Command::Compare(a) => commands::compare_cmd(a, manifest),
    }
}
