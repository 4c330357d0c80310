//! Batch experiment driver for `beamalign`: configuration, the `sweep`,
//! `optimize`, `compare` and `simulate` commands, and CSV output.

pub mod commands;
pub mod config;
pub mod table;

pub use commands::Output;
pub use config::{ExperimentConfig, FileConfig, Overrides};
pub use table::{Cell, Table};
