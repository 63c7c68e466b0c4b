//! Online learners: EXP3-IX, EXP4-IX, projected OGD on the dual, and the two
//! primal-dual compositions built from them.

mod exp3ix;
mod exp4ix;
mod lagrangian;
mod ogd;

pub use exp3ix::{default_learning_rate, Exp3Ix, PayoffRange};
pub use exp4ix::Exp4Ix;
pub use lagrangian::{
    dual_gradients, run_lagrangian_diw, run_lagrangian_emd, DualParams, LagrangianConfig,
    LagrangianMode,
};
pub use ogd::{dual_regret, dual_regret_bound, Ogd};
