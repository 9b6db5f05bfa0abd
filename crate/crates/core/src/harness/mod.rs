//! Coverage experiments: replicate data generation, Stage-1 estimation and
//! every requested interval, then tally coverage of the true value and
//! interval widths.
//!
//! Replication `i` draws all of its randomness from the stream
//! `(master_seed, i)`, and results are aggregated in replication order, so a
//! report is identical for any number of worker threads.

mod config;
mod report;
mod run;

pub use config::{ExperimentConfig, Method, DEFAULT_OB_MC_REPS};
pub use report::{ExperimentReport, MethodSummary, Precision};
pub use run::{
    length_distribution_check, run_experiment, run_experiment_with_workers, Experiment,
    MethodOutcome, ReplicationOutcome, StageOnePlan,
};
