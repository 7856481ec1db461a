//! Configuration, orchestration and output for the `granular` command.

// NaN-rejecting checks are written as negated comparisons on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod runner;

pub use config::RunConfig;
pub use error::CliError;
pub use runner::{oracle, output_dir, run, validate, Summary};
