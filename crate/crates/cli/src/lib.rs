//! Library half of the `shuffle-rdp` command-line tool.
//!
//! The binary is a thin clap front end; everything it prints or writes is
//! produced here so it can be tested without spawning processes.

pub mod curve;
pub mod error;
pub mod format;
pub mod verify;

pub use curve::{CurveRequest, DEFAULT_CURVE_METHODS};
pub use error::CliError;
pub use format::{format_g12, format_lambda};
pub use verify::{run_suite, PropertyResult, Suite, DEFAULT_SEED, SEED_ENV};
