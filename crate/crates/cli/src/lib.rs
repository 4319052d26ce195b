//! Command-line front end: config handling, staged output and the
//! subcommands built on `sentivol-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod svg;

use std::path::{Path, PathBuf};

pub use commands::Command;
pub use config::{Overrides, RunConfig};
pub use error::CliError;

/// Loads the config (defaults when `config` is `None`), applies overrides.
pub fn resolve(config: Option<&Path>, ov: &Overrides) -> Result<config::Resolved, CliError> {
    let base = match config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    base.resolve(config, ov)
}

/// Runs one command end to end and returns the files written.
pub fn execute(
    command: Command,
    config: Option<&Path>,
    ov: &Overrides,
) -> Result<Vec<PathBuf>, CliError> {
    let resolved = resolve(config, ov)?;
    let out = resolved.out.clone();
    let ctx = output::Context::new(resolved, command.name());
    let artifacts = command.run(&ctx)?;
    artifacts.commit(&out)
}
