//! Config-driven batch runner for the c2flow experiments.

pub mod config;
pub mod error;
pub mod output;
pub mod plot;
pub mod run;
pub mod verify;

pub use config::{RunConfig, Scenario, Solver};
pub use error::CliError;
pub use run::{run, RunSummary};
pub use verify::{verify, VerifyReport};
