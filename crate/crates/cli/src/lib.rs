//! Command-line harness around `frame-hebb-core`: configuration files,
//! CSV records, and the `equivalence`, `frame-check`, `train` and `report`
//! commands.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod commands;
pub mod config;
pub mod error;
pub mod record;

pub use commands::{cmd_equivalence, cmd_frame_check, cmd_report, cmd_train, OutputOptions};
pub use config::{Overrides, RunConfig};
pub use error::CliError;
pub use record::ExperimentRecord;
