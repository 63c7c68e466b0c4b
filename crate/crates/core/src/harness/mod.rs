//! Experiment plumbing: JSON configs, seeded repetitions, sweeps and reports.

pub mod config;
pub mod report;
pub mod runner;

pub use config::{
    generate, AlgorithmSpec, Axis, BenchmarkSpec, ExperimentConfig, FamilySpec, Generated,
    InstanceSpec, Radius, SweepConfig, SweepSpec,
};
pub use report::{write_experiment, write_runlog, write_sweep};
pub use runner::{
    aggregate, compute_opt, fit_log_log, map_repetitions, mean_se, run_algorithm, run_experiment,
    run_repetitions, run_sweep, AggregateRow, ExperimentReport, RepOutcome, RepRow, SlopeFit,
    SweepReport,
};
