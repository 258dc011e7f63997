//! Command implementations behind the `gmq` binary.

pub mod cli;
pub mod commands;
pub mod config;
pub mod svg;
pub mod testfns;

pub use commands::{CliError, Outcome};
