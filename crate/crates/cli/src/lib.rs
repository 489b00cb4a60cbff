//! Command-line harness for the `bsg-core` solvers: configuration files,
//! single solves, weighting-parameter sweeps with CSV and SVG output, the
//! invariant suite and a grid-search oracle.

pub mod app;
pub mod commands;
pub mod config;
pub mod grid;
pub mod record;
pub mod svg;
pub mod verify;

pub use app::{main_with_args, Cli, Command};
pub use config::{load_config, parse_config, LoadedConfig};
pub use record::SweepRecord;
