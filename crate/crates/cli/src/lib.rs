//! Command-line front end for `bdp-core`: configuration parsing, the
//! computational subcommands and the `verify` pipeline.

pub mod commands;
pub mod config;
pub mod verify;

pub use config::{parse_config, parse_config_str, ConfigError, ExperimentConfig, NuMode};
pub use verify::{run_verify, Report};

/// Float formatting used for every CSV field: 17 significant digits.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}
