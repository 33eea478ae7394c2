//! Experiment driver behind the `areasim` binary.
//!
//! Everything the binary does is reachable through [`config::load_config`]
//! and [`runner::run_experiment`], so integration tests exercise the same
//! paths as the command line.

pub mod config;
pub mod runner;
