//! Sweeps, presets and validation reports behind the `nomanet` binary.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod presets;
pub mod sweep;
pub mod validate;

pub use error::{CliError, CliResult};
pub use presets::Preset;
pub use sweep::{run_sweep, write_csv, Engine, Row, RunOptions, SweepSpec};
pub use validate::{validate_report, Check, ValidateOptions};
