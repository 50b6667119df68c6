//! Command-line interface and HTTP API for the ganseval workbench.

pub mod commands;
pub mod service;

pub use commands::run_cli;
