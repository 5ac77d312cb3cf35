//! Command-line front end: config parsing, subcommand runs, CSV and
//! manifest output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod run;

pub use config::{load_config, parse_config, ConfigError, ConfigErrors, SimConfig};
pub use run::{run, run_with_workers, RunManifest, RunOutcome, Subcommand};
