//! Primal-dual runners. The primal bandit learner is fed the Lagrangified
//! payoff `r + lambda (B/T - c)`; the dual OGD is fed the loss
//! `lambda (B/T - c)`. Once the remaining budget drops below one unit (the
//! largest possible per-round cost) the runner plays the null action for the
//! rest of the horizon, still feeding both learners.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::exp3ix::{Exp3Ix, PayoffRange};
use super::exp4ix::Exp4Ix;
use super::ogd::Ogd;
use crate::error::{Error, Result};
use crate::model::{ratio_bound_alpha, Instance, MixedAction, RoundRecord, RunLog, Strategy, NULL_ACTION};
use crate::rng::{sample_index, stream_rng, RngStream};

/// Which composition to run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum LagrangianMode {
    /// EXP4-IX over an explicit expert family; `radius` is the EMD allowance `D`.
    Emd { radius: f64 },
    /// EXP3-IX restarted on every disjoint window of length `window`.
    Diw { window: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagrangianConfig {
    #[serde(flatten)]
    pub mode: LagrangianMode,
    /// Dual bound; defaults to the instance's reward/cost ratio bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_bar: Option<f64>,
    pub rng_seed: u64,
}

/// Dual bound and step size resolved for one instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualParams {
    pub lambda_bar: f64,
    pub eta: f64,
}

impl DualParams {
    /// `lambda_bar` is the override or the ratio bound; `eta` is
    /// `lambda_bar / sqrt(max(D, T))` for EMD and `lambda_bar / sqrt(w T)` for DIW.
    pub fn resolve(inst: &Instance, cfg: &LagrangianConfig) -> Result<Self> {
        let lambda_bar = match cfg.lambda_bar {
            Some(l) => l,
            None => ratio_bound_alpha(inst),
        };
        if !lambda_bar.is_finite() {
            return Err(Error::Config(
                "rewards are not bounded by a multiple of costs; pass lambda_bar explicitly".into(),
            ));
        }
        if lambda_bar < 0.0 {
            return Err(Error::Config(format!("lambda_bar {lambda_bar} is negative")));
        }
        let horizon = inst.horizon() as f64;
        let scale = match cfg.mode {
            LagrangianMode::Emd { radius } => {
                if !(radius >= 0.0 && radius.is_finite()) {
                    return Err(Error::Config(format!("EMD radius {radius} must be finite and >= 0")));
                }
                radius.max(horizon)
            }
            LagrangianMode::Diw { window } => {
                if window == 0 || !inst.horizon().is_multiple_of(window) {
                    return Err(Error::Config(format!(
                        "window {window} must divide horizon {}",
                        inst.horizon()
                    )));
                }
                window as f64 * horizon
            }
        };
        Ok(Self { lambda_bar, eta: lambda_bar / scale.sqrt() })
    }
}

trait Primal {
    fn begin_round(&mut self, round: usize);
    fn distribution(&self) -> Vec<f64>;
    fn update(&mut self, arm: usize, prob: f64, payoff: f64) -> Result<()>;
}

struct Windowed {
    learner: Exp3Ix,
    window: usize,
}

impl Primal for Windowed {
    fn begin_round(&mut self, round: usize) {
        if round.is_multiple_of(self.window) {
            self.learner.reset();
        }
    }
    fn distribution(&self) -> Vec<f64> {
        self.learner.distribution()
    }
    fn update(&mut self, arm: usize, prob: f64, payoff: f64) -> Result<()> {
        self.learner.update(arm, prob, payoff)
    }
}

impl Primal for Exp4Ix {
    fn begin_round(&mut self, _round: usize) {}
    fn distribution(&self) -> Vec<f64> {
        Exp4Ix::distribution(self)
    }
    fn update(&mut self, arm: usize, prob: f64, payoff: f64) -> Result<()> {
        Exp4Ix::update(self, arm, prob, payoff)
    }
}

fn run_loop(inst: &Instance, primal: &mut impl Primal, mut dual: Ogd, seed: u64) -> Result<RunLog> {
    let horizon = inst.horizon();
    let rate = inst.pacing_rate();
    let mut rng = stream_rng(seed, RngStream::Algorithm);
    let mut rounds = Vec::with_capacity(horizon);
    let mut spent = 0.0;
    let mut stop_time = None;
    for t in 0..horizon {
        primal.begin_round(t);
        let probs = primal.distribution();
        let lambda = dual.lambda();
        if stop_time.is_none() && inst.budget() - spent < 1.0 {
            stop_time = Some(t);
        }
        let arm = if stop_time.is_some() { NULL_ACTION } else { sample_index(&probs, &mut rng) };
        let reward = inst.reward(t, arm);
        let cost = inst.cost(t, arm);
        spent += cost;
        let gradient = rate - cost;
        primal.update(arm, probs[arm], reward + lambda * gradient)?;
        dual.step(gradient);
        rounds.push(RoundRecord {
            t: t + 1,
            primal_dist: MixedAction::new(probs)?,
            lambda,
            arm,
            reward,
            cost,
        });
    }
    Ok(RunLog { rounds, stop_time: stop_time.unwrap_or(horizon) })
}

/// LagrangianEMD: EXP4-IX over `experts` against an OGD dual with step
/// `lambda_bar / sqrt(max(D, T))`.
pub fn run_lagrangian_emd(
    inst: &Instance,
    experts: Arc<[Strategy]>,
    cfg: &LagrangianConfig,
) -> Result<RunLog> {
    if !matches!(cfg.mode, LagrangianMode::Emd { .. }) {
        return Err(Error::Config("run_lagrangian_emd needs an EMD-mode config".into()));
    }
    if experts.is_empty() {
        return Err(Error::Config("expert family is empty".into()));
    }
    for e in experts.iter() {
        e.check_against(inst)?;
    }
    let params = DualParams::resolve(inst, cfg)?;
    let range = PayoffRange::lagrangified(params.lambda_bar);
    let mut primal = Exp4Ix::new(experts, inst.horizon(), range)?;
    run_loop(inst, &mut primal, Ogd::new(params.eta, params.lambda_bar)?, cfg.rng_seed)
}

/// LagrangianDIw: EXP3-IX re-initialized on each length-`w` window; the dual
/// persists across windows with step `lambda_bar / sqrt(w T)`.
pub fn run_lagrangian_diw(inst: &Instance, cfg: &LagrangianConfig) -> Result<RunLog> {
    let LagrangianMode::Diw { window } = cfg.mode else {
        return Err(Error::Config("run_lagrangian_diw needs a DIW-mode config".into()));
    };
    let params = DualParams::resolve(inst, cfg)?;
    let range = PayoffRange::lagrangified(params.lambda_bar);
    let learner = Exp3Ix::new(inst.num_actions(), window, range)?;
    let mut primal = Windowed { learner, window };
    run_loop(inst, &mut primal, Ogd::new(params.eta, params.lambda_bar)?, cfg.rng_seed)
}

/// Per-round dual gradients `B/T - c_t(a_t)` of a run.
pub fn dual_gradients(inst: &Instance, log: &RunLog) -> Vec<f64> {
    let rate = inst.pacing_rate();
    log.rounds.iter().map(|r| rate - r.cost).collect()
}
