//! Library side of the `qdesk` command: report types, SVG diagrams and the
//! subcommand implementations.

pub mod commands;
pub mod diagram;
pub mod report;

pub use commands::{CliError, CliResult, CommonOptions, ProgramSource};
