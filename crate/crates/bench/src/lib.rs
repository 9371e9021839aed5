//! Experiment runner for the randomized QLP algorithms: accuracy/timing
//! tables, singular value tracking data, bound verification and matrix
//! generation, all written as CSV.

pub mod config;
pub mod error;
pub mod experiment;

pub use config::Settings;
pub use error::{BenchError, Result};
pub use experiment::{run_table, run_tracking, verify_bounds, ExperimentConfig, Method};
