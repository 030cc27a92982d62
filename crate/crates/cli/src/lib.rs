//! Library half of the `cauchy-omega` command-line tool: run configuration,
//! instance generation, the subcommands and the precision-envelope sweep.
//!
//! `main.rs` only parses arguments and routes output; everything testable
//! lives here.

pub mod commands;
pub mod config;
pub mod envelope;
pub mod exit;
pub mod generate;

pub use commands::{cmd_cond, cmd_gen, cmd_lyapunov, cmd_map, cmd_verify, CheckList, Output};
pub use config::{OutputFormat, RunConfig};
pub use exit::{CliError, Status};
pub use generate::{generate, GenParams, Range, MAX_DRAWS};
