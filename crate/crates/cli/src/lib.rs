//! Command-line front end for `phasekit`: argument grammar, run
//! configuration and command implementations.

pub mod commands;
pub mod config;
pub mod figures;
pub mod parse;

pub use commands::{configure_threads, run, CliError};
pub use config::{CommandName, RunConfig};
pub use parse::{parse_complex, parse_state, parse_system, ParseError};
