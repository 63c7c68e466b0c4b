//! Generators for the lower-bound and counterexample instances, and JSON
//! instance files.
//!
//! Random constructions are materialized into dense tables at generation
//! time, so every instance is oblivious to the learner.

use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, InstanceFile, MixedAction, SpendingPattern, Strategy};
use crate::rng::{stream_rng, RngStream};

fn actions(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Which second half the spend-or-save instance gets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpendOrSave {
    /// Second-half reward 0.
    Worse,
    /// Second-half reward 1.
    Better,
}

/// Two actions, the null action and `arm2` with cost 1 every round; budget
/// `T/2`; `arm2` pays 1/2 in the first half and 0 or 1 in the second.
pub fn gen_spend_or_save(horizon: usize, variant: SpendOrSave) -> Result<Instance> {
    if horizon == 0 || !horizon.is_multiple_of(2) {
        return Err(Error::Precondition(format!("spend-or-save needs even T, got {horizon}")));
    }
    let tail = match variant {
        SpendOrSave::Worse => 0.0,
        SpendOrSave::Better => 1.0,
    };
    let rewards = (0..horizon)
        .map(|t| vec![0.0, if t < horizon / 2 { 0.5 } else { tail }])
        .collect();
    Instance::new(horizon as f64 / 2.0, actions(&["null", "arm2"]), rewards, vec![vec![0.0, 1.0]; horizon])
}

/// Both siblings, `(worse, better)`.
pub fn gen_spend_or_save_pair(horizon: usize) -> Result<(Instance, Instance)> {
    Ok((
        gen_spend_or_save(horizon, SpendOrSave::Worse)?,
        gen_spend_or_save(horizon, SpendOrSave::Better)?,
    ))
}

/// The two strategies behind the spend-or-save optima: the constant 1/2-1/2
/// mixture, and `arm2` until the budget is gone followed by the null action.
pub fn spend_or_save_family(horizon: usize) -> Vec<Strategy> {
    let half = MixedAction::new(vec![0.5, 0.5]).expect("valid");
    let spend_then_save = (0..horizon)
        .map(|t| if t < horizon / 2 { MixedAction::point_mass(2, 1) } else { MixedAction::null(2) })
        .collect();
    vec![
        Strategy::constant(half, horizon),
        Strategy::new(spend_then_save).expect("uniform arity"),
    ]
}

/// Null, `H`, `L`; each round a fair coin gives reward 1 to exactly one of
/// `H` and `L`. Every cost is 0 and `B = T`.
pub fn gen_coinflip(horizon: usize, seed: u64) -> Result<Instance> {
    if horizon == 0 {
        return Err(Error::Precondition("coin-flip needs T >= 1".into()));
    }
    let mut rng = stream_rng(seed, RngStream::Instance);
    let rewards = (0..horizon)
        .map(|_| if rng.gen::<bool>() { vec![0.0, 1.0, 0.0] } else { vec![0.0, 0.0, 1.0] })
        .collect();
    Instance::new(horizon as f64, actions(&["null", "H", "L"]), rewards, vec![vec![0.0; 3]; horizon])
}

/// Parameters of the random-walk construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkParams {
    pub horizon: usize,
    pub window: usize,
    /// Walk step; always of the form `1/(2k)`.
    pub epsilon: f64,
    /// Step originally asked for, before rounding.
    pub requested_epsilon: f64,
    pub seed: u64,
}

/// Nearest value of the form `1/(2k)`, `k >= 1`.
pub fn round_to_half_divisor(eps: f64) -> f64 {
    let k = 1.0 / (2.0 * eps);
    let lo = k.floor().max(1.0);
    let hi = k.ceil().max(1.0);
    let (a, b) = (1.0 / (2.0 * lo), 1.0 / (2.0 * hi));
    if (a - eps).abs() <= (b - eps).abs() {
        a
    } else {
        b
    }
}

impl WalkParams {
    /// Uses `epsilon` if given (rounded to the nearest `1/(2k)`), otherwise
    /// `sqrt(w/T)` rounded the same way.
    pub fn new(horizon: usize, window: usize, epsilon: Option<f64>, seed: u64) -> Result<Self> {
        if window == 0 || !window.is_multiple_of(2) || !horizon.is_multiple_of(window) {
            return Err(Error::Precondition(format!(
                "window {window} must be even and divide horizon {horizon}"
            )));
        }
        if let Some(eps) = epsilon {
            if !(eps > 0.0 && eps <= 0.5) {
                return Err(Error::Precondition(format!("walk step {eps} outside (0, 1/2]")));
            }
        }
        // sqrt(w/T) exceeds 1/2 when w > T/4; it then rounds down to 1/2.
        let requested = epsilon.unwrap_or_else(|| (window as f64 / horizon as f64).sqrt());
        Ok(Self {
            horizon,
            window,
            epsilon: round_to_half_divisor(requested),
            requested_epsilon: requested,
            seed,
        })
    }

    /// Number of half-window blocks, `2T/w`.
    pub fn blocks(&self) -> usize {
        2 * self.horizon / self.window
    }
}

/// The random-walk instance with the realized walk.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkInstance {
    pub instance: Instance,
    pub params: WalkParams,
    /// Frozen walk `R_0, ..., R_{2T/w - 1}`.
    pub values: Vec<f64>,
    /// Pre-absorption walk positions `R~_0, ..., R~_N`.
    pub raw_walk: Vec<f64>,
    /// Stopping index `N`.
    pub stop_index: usize,
    /// Whether the walk actually hit 0 or 1.
    pub absorbed: bool,
}

/// Three actions over `2T/w` half-window blocks. In block `k`, `a1` costs 1
/// and pays `R_k` when `k` is even, `a2` does so when `k` is odd; the idle
/// action pays and costs nothing. `R` is a symmetric walk of step `epsilon`
/// from 1/2, frozen once it first hits 0 or 1. `B = T/2`.
pub fn gen_random_walk(params: &WalkParams) -> Result<WalkInstance> {
    let WalkParams { horizon, window, epsilon, seed, .. } = *params;
    let units = (0.5 / epsilon).round() as i64;
    if window == 0 || window % 2 != 0 || horizon % window != 0 {
        return Err(Error::Precondition(format!(
            "window {window} must be even and divide horizon {horizon}"
        )));
    }
    if units < 1 || ((0.5 / units as f64) - epsilon).abs() > 1e-12 {
        return Err(Error::Precondition(format!("walk step {epsilon} does not divide 1/2")));
    }
    let top = 2 * units;
    let blocks = params.blocks();
    let mut rng = stream_rng(seed, RngStream::Instance);
    let mut pos = units;
    let mut raw_walk = Vec::new();
    let mut values = Vec::with_capacity(blocks);
    let mut stop = None;
    for n in 0..blocks {
        if stop.is_none() {
            pos += if rng.gen::<bool>() { 1 } else { -1 };
            raw_walk.push(pos as f64 / top as f64);
            if pos == 0 || pos == top {
                stop = Some(n);
            }
        }
        values.push(pos as f64 / top as f64);
    }
    let absorbed = stop.is_some();
    let stop_index = stop.unwrap_or(blocks - 1);

    let half = window / 2;
    let mut rewards = Vec::with_capacity(horizon);
    let mut costs = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let k = t / half;
        let r = values[k];
        if k % 2 == 0 {
            rewards.push(vec![0.0, r, 0.0]);
            costs.push(vec![0.0, 1.0, 0.0]);
        } else {
            rewards.push(vec![0.0, 0.0, r]);
            costs.push(vec![0.0, 0.0, 1.0]);
        }
    }
    let instance = Instance::new(horizon as f64 / 2.0, actions(&["null", "a1", "a2"]), rewards, costs)?;
    Ok(WalkInstance { instance, params: *params, values, raw_walk, stop_index, absorbed })
}

/// Reward tail of the two-pattern construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NecessityVariant {
    /// Reward 0 after the split round.
    Flat,
    /// Reward 1 after the split round.
    Boost,
}

/// Two-action instance separating two spending patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct NecessityInstance {
    pub instance: Instance,
    /// The comparators `x_t = c_t` and `x'_t = c'_t`.
    pub family: Vec<Strategy>,
    /// Split round (1-based): the largest prefix gap.
    pub tau: usize,
    /// `C_tau - C'_tau` (signed).
    pub prefix_gap: f64,
}

/// Null plus a `buy` action costing 1 each round; `buy` pays 1/2 up to the
/// round where the two patterns' prefix sums differ most, then 0 (`Flat`) or
/// 1 (`Boost`). The budget is the patterns' common mass.
pub fn gen_emd_necessity(
    c: &SpendingPattern,
    c_alt: &SpendingPattern,
    variant: NecessityVariant,
) -> Result<NecessityInstance> {
    let horizon = c.len();
    if horizon == 0 || c_alt.len() != horizon {
        return Err(Error::Dimension(format!("pattern lengths {} and {}", c.len(), c_alt.len())));
    }
    let (left, right) = (c.total(), c_alt.total());
    if (left - right).abs() > crate::emd::EMD_TOL {
        return Err(Error::MassMismatch { left, right });
    }
    let budget = left;
    if !(budget > 0.0 && budget < horizon as f64) {
        return Err(Error::Precondition(format!("common mass {budget} must lie in (0, T)")));
    }
    let (pc, pa) = (c.prefix_sums(), c_alt.prefix_sums());
    let (tau0, gap) = pc
        .iter()
        .zip(&pa)
        .map(|(x, y)| x - y)
        .enumerate()
        .fold((0, 0.0f64), |best, (t, g)| if g.abs() > best.1.abs() { (t, g) } else { best });
    if gap.abs() <= 1e-12 {
        return Err(Error::Precondition("patterns are equal; nothing to separate".into()));
    }
    let tail = match variant {
        NecessityVariant::Flat => 0.0,
        NecessityVariant::Boost => 1.0,
    };
    let rewards = (0..horizon).map(|t| vec![0.0, if t <= tau0 { 0.5 } else { tail }]).collect();
    let instance = Instance::new(budget, actions(&["null", "buy"]), rewards, vec![vec![0.0, 1.0]; horizon])?;
    let follow = |p: &SpendingPattern| -> Result<Strategy> {
        Strategy::new(
            p.spend().iter().map(|&s| MixedAction::new(vec![1.0 - s, s])).collect::<Result<_>>()?,
        )
    };
    Ok(NecessityInstance {
        instance,
        family: vec![follow(c)?, follow(c_alt)?],
        tau: tau0 + 1,
        prefix_gap: gap,
    })
}

/// Reads and validates a JSON instance file.
pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let text = fs::read_to_string(path)?;
    let file: InstanceFile = serde_json::from_str(&text)?;
    Instance::from_file(file)
}

pub fn save_instance(path: impl AsRef<Path>, inst: &Instance) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(inst)?)?;
    Ok(())
}
