//! File formats, experiment orchestration and the command-line front end
//! for the `rissac-core` simulator.

pub mod config;
pub mod error;
pub mod experiment;
pub mod formats;

pub use config::{resolve_seed, RunConfig, SEED_ENV};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, ExperimentSpec, Method, SweepVariable};
pub use formats::MetricsRow;
