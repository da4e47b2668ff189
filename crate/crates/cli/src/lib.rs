//! Command-line front end: single runs, experiment sweeps, oracle checks,
//! front data and the navigation server.

pub mod args;
pub mod commands;
pub mod error;
pub mod experiment;
pub mod front;
pub mod io;
pub mod tables;

pub use args::Cli;
pub use commands::run;
pub use error::{CliError, EXIT_CHECK_FAILED, EXIT_INPUT, EXIT_SOLVER};
