//! Argument parsing and command execution for the `parity-spectrum` binary.

pub mod args;
pub mod run;

pub use args::{Cli, Command};
pub use run::{execute, CliError, Output};

/// Caps the worker pool from `PARITY_SPECTRUM_THREADS`.
pub fn configure_threads(value: Option<&str>) -> Result<(), CliError> {
    let Some(v) = value else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "PARITY_SPECTRUM_THREADS must be a positive integer, got `{v}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}
