//! Batch driver: experiment specs from flags and TOML files, command runners, report files and
//! a versioned manifest for every run.

pub mod builtins;
pub mod commands;
pub mod error;
pub mod output;
pub mod spec;
pub mod verify;

pub use commands::{run, run_characteristics, run_compare, run_simulate, run_symbol, run_verify, RunSummary};
pub use error::{CliError, CliResult};
pub use spec::{parse_args, Command, ExperimentSpec, Format, ModelSource, ParseOutcome};
