//! IO, configuration, and experiment orchestration for the consensus-weight
//! toolkit. The `fastmix` binary exposes three subcommands:
//!
//! * `optimize` — build one weight matrix for a network and write it as CSV;
//! * `table` — compute the (rho, tau) grid of all methods across networks;
//! * `simulate` — run the Monte-Carlo team simulation from a JSON config and
//!   emit plot-ready error curves plus a summary table.

pub mod commands;
pub mod config;
mod error;
pub mod network;
pub mod report;

pub use error::CliError;

pub type Result<T> = std::result::Result<T, CliError>;
