//! Library side of the `ztcm` command: configuration, the run pipeline,
//! subcommands and report writers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod report;

pub use error::{CliError, CliResult, Failure};
