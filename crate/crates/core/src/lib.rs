//! Adversarial bandits with knapsacks under a single resource.
//!
//! The crate measures strategies against pacing benchmarks defined through
//! the Earth Mover's Distance between spending patterns, runs the primal-dual
//! learners that compete with those benchmarks, and generates the
//! lower-bound instances used to stress them.
//!
//! - [`model`]: instances, mixed actions, strategies, run logs.
//! - [`emd`]: prefix-sum EMD and distance to the sub-pacing set.
//! - [`benchmarks`]: per-window, sliding-window and finite-family optima.
//! - [`learners`]: EXP3-IX, EXP4-IX, OGD, and the Lagrangian runners.
//! - [`instances`]: generators and instance files.
//! - [`harness`]: seeded Monte-Carlo experiments, sweeps and reports.

// NaN-rejecting checks are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmarks;
pub mod emd;
pub mod error;
pub mod harness;
pub mod instances;
pub mod learners;
pub mod model;
pub mod rng;

pub use benchmarks::{
    best_fixed_single_constraint, opt_disjoint_windows, opt_finite_family, opt_fixed_sliding,
    OptResult,
};
pub use emd::{emd_between, in_g, min_emd_to_subpacing, EmdResult};
pub use error::{Error, Result};
pub use learners::{run_lagrangian_diw, run_lagrangian_emd, LagrangianConfig, LagrangianMode};
pub use model::{
    expected_reward_cost, ratio_bound_alpha, validate_instance, violation_process, Instance,
    Metrics, MixedAction, RoundRecord, RunLog, SpendingPattern, Strategy, NULL_ACTION,
};
