//! Experiment configuration, orchestration and output management.

pub mod config;
pub mod runner;

pub use config::{
    derive_point_seed, parse_policy_label, EpsilonConfig, ExperimentConfig, PolicyConfig,
    RlConfig, SweepSpec, WorkloadSource, MAX_REPLICA_CAP,
};
pub use runner::{execute, run_single, run_sweep, ExecutedRun, RunSummary, SweepSummary};
