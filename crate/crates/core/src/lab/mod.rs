//! Configuration, file formats and the batch runner behind the CLI.

pub mod config;
pub mod format;
pub mod rankgrad;
pub mod run;

pub use config::{parse_family, Analysis, ComplexSource, Inputs, RunConfig, TowerSource};
pub use format::{
    complex_to_json, load_complex, load_tower, parse_complex, parse_tower, tower_to_json, Diagnostics,
};
pub use rankgrad::{rank_gradient, RankGradientReport, RankGradientRow};
pub use run::{exit_code, fmt_float, run, write_atomic, RunOutcome, EXIT_INPUT, EXIT_OK, EXIT_VIOLATION};
