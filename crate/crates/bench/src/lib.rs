//! Experiment harness around `gsi-core`: seeded initialization and recovery
//! sweeps, Monte-Carlo moment checks, and CSV/JSON export.

pub mod config;
pub mod error;
pub mod experiment;
pub mod export;
pub mod signal;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{BenchError, Result};
pub use experiment::{
    run_init_experiment, run_moment_verify, run_recovery_experiment, run_single_solve, trial_seed, MomentReport,
    ResultRow, ResultTable, SingleSolveOutput, TrialRecord,
};
pub use export::Format;
pub use signal::generate_signal;
