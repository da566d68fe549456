//! File formats, the trial harness and the command implementations behind
//! the `qecc` binary.

pub mod commands;
pub mod error;
pub mod harness;
pub mod instance_file;
pub mod record;

pub use error::{CliError, Result};
pub use harness::{Algo, BudgetSpec, RunConfig};
pub use record::RunRecord;
