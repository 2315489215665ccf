//! File formats and command-line front end for `filament-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod io;

pub use args::{Cli, Command};
pub use commands::{execute, run, CliError, Manifest};
