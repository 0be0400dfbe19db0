//! Scenario runner for the wfbeam toolkit: JSON configs in, CSV tables,
//! a JSON summary and a run manifest out.

pub mod config;
pub mod output;
pub mod run;

pub use config::Config;
pub use run::{run, Invocation, RunError, RunResult, Subcommand};
