//! Batch driver for the molab experiments: config parsing, dispatch to the
//! core runners, and CSV/JSON/SVG artifacts.
// `!(x > 0.0)` style guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod run;
pub mod svg;

pub use config::{parse_config, ConfigError, ExperimentConfig};
pub use run::{run, strip_seconds, Outcome, RunError, Status};

/// Exit code for parse, execution and I/O errors.
pub const EXIT_ERROR: i32 = 2;
