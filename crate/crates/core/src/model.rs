//! Domain types shared by every other module: instances, mixed actions,
//! strategies, spending patterns and run logs, plus the elementary
//! per-round quantities computed from them.
//!
//! Rounds are addressed with 0-based indices in the API. Files and reports
//! use 1-based round numbers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of the null action in every instance.
pub const NULL_ACTION: usize = 0;

/// Absolute tolerance on the sum of a probability vector.
pub const PROB_SUM_TOL: f64 = 1e-9;

/// Slack allowed on entries that are computed as convex combinations and may
/// drift outside `[0, 1]` by rounding.
const UNIT_SLACK: f64 = 1e-12;

/// A single-resource adversarial BwK instance with dense reward/cost tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    horizon: usize,
    budget: f64,
    actions: Vec<String>,
    rewards: Vec<f64>,
    costs: Vec<f64>,
}

/// On-disk JSON layout of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(rename = "B")]
    pub budget: f64,
    pub actions: Vec<String>,
    pub rewards: Vec<Vec<f64>>,
    pub costs: Vec<Vec<f64>>,
}

impl Instance {
    /// Builds an instance and rejects it unless [`validate_instance`] is empty.
    pub fn new(
        budget: f64,
        actions: Vec<String>,
        rewards: Vec<Vec<f64>>,
        costs: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let inst = Self::new_unchecked(budget, actions, rewards, costs)?;
        let problems = validate_instance(&inst);
        if problems.is_empty() {
            Ok(inst)
        } else {
            Err(Error::InvalidInstance(problems))
        }
    }

    /// Checks only that the tables are rectangular and match the action list.
    pub fn new_unchecked(
        budget: f64,
        actions: Vec<String>,
        rewards: Vec<Vec<f64>>,
        costs: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let horizon = rewards.len();
        let k = actions.len();
        if costs.len() != horizon {
            return Err(Error::Dimension(format!(
                "rewards have {horizon} rows but costs have {}",
                costs.len()
            )));
        }
        for (t, (r, c)) in rewards.iter().zip(&costs).enumerate() {
            if r.len() != k || c.len() != k {
                return Err(Error::Dimension(format!(
                    "round {} has {} rewards and {} costs for {k} actions",
                    t + 1,
                    r.len(),
                    c.len()
                )));
            }
        }
        Ok(Self {
            horizon,
            budget,
            actions,
            rewards: rewards.into_iter().flatten().collect(),
            costs: costs.into_iter().flatten().collect(),
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    /// Per-round budget `B/T`.
    pub fn pacing_rate(&self) -> f64 {
        self.budget / self.horizon as f64
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn reward(&self, round: usize, action: usize) -> f64 {
        self.rewards[round * self.actions.len() + action]
    }

    pub fn cost(&self, round: usize, action: usize) -> f64 {
        self.costs[round * self.actions.len() + action]
    }

    pub fn reward_row(&self, round: usize) -> &[f64] {
        let k = self.actions.len();
        &self.rewards[round * k..(round + 1) * k]
    }

    pub fn cost_row(&self, round: usize) -> &[f64] {
        let k = self.actions.len();
        &self.costs[round * k..(round + 1) * k]
    }

    pub fn to_file(&self) -> InstanceFile {
        let k = self.actions.len().max(1);
        InstanceFile {
            horizon: self.horizon,
            budget: self.budget,
            actions: self.actions.clone(),
            rewards: self.rewards.chunks(k).map(<[f64]>::to_vec).collect(),
            costs: self.costs.chunks(k).map(<[f64]>::to_vec).collect(),
        }
    }

    pub fn from_file(file: InstanceFile) -> Result<Self> {
        if file.rewards.len() != file.horizon {
            return Err(Error::Dimension(format!(
                "T = {} but {} reward rows",
                file.horizon,
                file.rewards.len()
            )));
        }
        Self::new(file.budget, file.actions, file.rewards, file.costs)
    }
}

impl Serialize for Instance {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_file().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Instance {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let file = InstanceFile::deserialize(deserializer)?;
        Instance::from_file(file).map_err(serde::de::Error::custom)
    }
}

/// Every failed instance invariant, as human-readable descriptions. Empty iff
/// the instance is valid.
pub fn validate_instance(inst: &Instance) -> Vec<String> {
    let mut out = Vec::new();
    if inst.horizon == 0 {
        out.push("horizon must be positive".to_string());
    }
    if inst.actions.is_empty() {
        out.push("action list is empty".to_string());
    } else if inst.actions[NULL_ACTION] != "null" {
        out.push("action 0 must be named \"null\"".to_string());
    }
    if !(inst.budget.is_finite() && inst.budget >= 0.0) {
        out.push("budget must be finite and non-negative".to_string());
    } else if inst.budget > inst.horizon as f64 {
        out.push("budget exceeds horizon".to_string());
    }
    if !inst.actions.is_empty() && inst.horizon > 0 {
        if (0..inst.horizon).any(|t| inst.reward(t, NULL_ACTION) != 0.0) {
            out.push("null action has nonzero reward".to_string());
        }
        if (0..inst.horizon).any(|t| inst.cost(t, NULL_ACTION) != 0.0) {
            out.push("null action has nonzero cost".to_string());
        }
    }
    let in_unit = |v: &f64| v.is_finite() && (0.0..=1.0).contains(v);
    if !inst.rewards.iter().all(in_unit) {
        out.push("rewards outside [0,1]".to_string());
    }
    if !inst.costs.iter().all(in_unit) {
        out.push("costs outside [0,1]".to_string());
    }
    out
}

/// A distribution over the action set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MixedAction {
    probs: Vec<f64>,
}

impl MixedAction {
    /// Accepts vectors whose sum is within [`PROB_SUM_TOL`] of one and
    /// renormalizes them exactly.
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty probability vector".into()));
        }
        for p in probs.iter_mut() {
            if !p.is_finite() || *p < -UNIT_SLACK {
                return Err(Error::InvalidDistribution(format!("entry {p} is not a probability")));
            }
            *p = p.max(0.0);
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        probs.iter_mut().for_each(|p| *p /= sum);
        Ok(Self { probs })
    }

    pub fn point_mass(num_actions: usize, action: usize) -> Self {
        let mut probs = vec![0.0; num_actions];
        probs[action] = 1.0;
        Self { probs }
    }

    pub fn uniform(num_actions: usize) -> Self {
        Self { probs: vec![1.0 / num_actions as f64; num_actions] }
    }

    pub fn null(num_actions: usize) -> Self {
        Self::point_mass(num_actions, NULL_ACTION)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

impl TryFrom<Vec<f64>> for MixedAction {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        MixedAction::new(v)
    }
}

impl From<MixedAction> for Vec<f64> {
    fn from(x: MixedAction) -> Self {
        x.probs
    }
}

/// A sequence of mixed actions, one per round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Strategy {
    per_round: Vec<MixedAction>,
}

impl Strategy {
    pub fn new(per_round: Vec<MixedAction>) -> Result<Self> {
        if let Some(first) = per_round.first() {
            if per_round.iter().any(|x| x.len() != first.len()) {
                return Err(Error::Dimension("strategy mixes different action counts".into()));
            }
        }
        Ok(Self { per_round })
    }

    pub fn constant(x: MixedAction, horizon: usize) -> Self {
        Self { per_round: vec![x; horizon] }
    }

    pub fn all_null(num_actions: usize, horizon: usize) -> Self {
        Self::constant(MixedAction::null(num_actions), horizon)
    }

    pub fn from_matrix(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows.into_iter().map(MixedAction::new).collect::<Result<_>>()?)
    }

    pub fn to_matrix(&self) -> Vec<Vec<f64>> {
        self.per_round.iter().map(|x| x.probs.clone()).collect()
    }

    pub fn per_round(&self) -> &[MixedAction] {
        &self.per_round
    }

    pub fn horizon(&self) -> usize {
        self.per_round.len()
    }

    pub fn at(&self, round: usize) -> &MixedAction {
        &self.per_round[round]
    }

    /// Errors unless the strategy covers every round with the instance's actions.
    pub fn check_against(&self, inst: &Instance) -> Result<()> {
        if self.horizon() != inst.horizon() {
            return Err(Error::Dimension(format!(
                "strategy covers {} rounds, instance has {}",
                self.horizon(),
                inst.horizon()
            )));
        }
        if self.per_round.iter().any(|x| x.len() != inst.num_actions()) {
            return Err(Error::Dimension("strategy action count differs from instance".into()));
        }
        Ok(())
    }
}

/// Per-round expenditures, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SpendingPattern {
    spend: Vec<f64>,
}

impl SpendingPattern {
    pub fn new(mut spend: Vec<f64>) -> Result<Self> {
        for s in spend.iter_mut() {
            if !s.is_finite() || *s < -UNIT_SLACK || *s > 1.0 + UNIT_SLACK {
                return Err(Error::Precondition(format!("spend {s} outside [0,1]")));
            }
            *s = s.clamp(0.0, 1.0);
        }
        Ok(Self { spend })
    }

    pub fn spend(&self) -> &[f64] {
        &self.spend
    }

    pub fn len(&self) -> usize {
        self.spend.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spend.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.spend.iter().sum()
    }

    /// Running totals `C_1, ..., C_T`.
    pub fn prefix_sums(&self) -> Vec<f64> {
        self.spend
            .iter()
            .scan(0.0, |acc, &s| {
                *acc += s;
                Some(*acc)
            })
            .collect()
    }
}

impl TryFrom<Vec<f64>> for SpendingPattern {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        SpendingPattern::new(v)
    }
}

impl From<SpendingPattern> for Vec<f64> {
    fn from(p: SpendingPattern) -> Self {
        p.spend
    }
}

/// One round of a learner run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based round number.
    pub t: usize,
    pub primal_dist: MixedAction,
    pub lambda: f64,
    pub arm: usize,
    pub reward: f64,
    pub cost: f64,
}

/// Full trace of a Lagrangian run. `stop_time` is the number of rounds played
/// before the budget guard switched the learner to the null action (`T` if
/// it never fired).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub rounds: Vec<RoundRecord>,
    pub stop_time: usize,
}

impl RunLog {
    pub fn total_reward(&self) -> f64 {
        self.rounds.iter().map(|r| r.reward).sum()
    }

    pub fn total_cost(&self) -> f64 {
        self.rounds.iter().map(|r| r.cost).sum()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.lambda).collect()
    }

    /// The strategy actually followed: the learner's distribution up to the
    /// stop time, the null action afterwards.
    pub fn played_strategy(&self) -> Strategy {
        let per_round = self
            .rounds
            .iter()
            .map(|r| {
                if r.t <= self.stop_time {
                    r.primal_dist.clone()
                } else {
                    MixedAction::null(r.primal_dist.len())
                }
            })
            .collect();
        Strategy { per_round }
    }

    /// Expected reward of [`RunLog::played_strategy`].
    pub fn expected_reward(&self, inst: &Instance) -> f64 {
        self.rounds
            .iter()
            .filter(|r| r.t <= self.stop_time)
            .map(|r| dot(inst.reward_row(r.t - 1), r.primal_dist.probs()))
            .sum()
    }

    /// `(sum of realized cost - B)^+`.
    pub fn realized_violation(&self, budget: f64) -> f64 {
        (self.total_cost() - budget).max(0.0)
    }
}

/// Regret and violation summary of one evaluated strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub total_reward: f64,
    pub opt_value: f64,
    pub regret: f64,
    pub violation: Vec<f64>,
}

impl Metrics {
    /// Metrics of a strategy evaluated on its expected rewards and costs.
    pub fn for_strategy(inst: &Instance, strat: &Strategy, opt_value: f64) -> Result<Self> {
        let total_reward = expected_total_reward(inst, strat)?;
        Ok(Self {
            total_reward,
            opt_value,
            regret: opt_value - total_reward,
            violation: violation_process(inst, strat)?,
        })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Expected reward and cost of `x` in `round` (0-based).
pub fn expected_reward_cost(inst: &Instance, round: usize, x: &MixedAction) -> Result<(f64, f64)> {
    if round >= inst.horizon() {
        return Err(Error::RoundOutOfRange { round, horizon: inst.horizon() });
    }
    if x.len() != inst.num_actions() {
        return Err(Error::Dimension(format!(
            "mixed action over {} actions, instance has {}",
            x.len(),
            inst.num_actions()
        )));
    }
    let r = dot(inst.reward_row(round), x.probs()).clamp(0.0, 1.0);
    let c = dot(inst.cost_row(round), x.probs()).clamp(0.0, 1.0);
    Ok((r, c))
}

/// Expected per-round spend `(c_t(x_t))_t` of a strategy.
pub fn expected_spending(inst: &Instance, strat: &Strategy) -> Result<SpendingPattern> {
    strat.check_against(inst)?;
    let spend = strat
        .per_round()
        .iter()
        .enumerate()
        .map(|(t, x)| dot(inst.cost_row(t), x.probs()))
        .collect();
    SpendingPattern::new(spend)
}

pub fn expected_total_reward(inst: &Instance, strat: &Strategy) -> Result<f64> {
    strat.check_against(inst)?;
    Ok(strat
        .per_round()
        .iter()
        .enumerate()
        .map(|(t, x)| dot(inst.reward_row(t), x.probs()))
        .sum())
}

/// `V_t = (sum_{s<=t} c_s(x_s) - t B/T)^+` for every round.
pub fn violation_process(inst: &Instance, strat: &Strategy) -> Result<Vec<f64>> {
    let spend = expected_spending(inst, strat)?;
    let rate = inst.pacing_rate();
    Ok(spend
        .prefix_sums()
        .into_iter()
        .enumerate()
        .map(|(t, cum)| (cum - (t + 1) as f64 * rate).max(0.0))
        .collect())
}

/// Least `alpha` with `r_t(a) <= alpha c_t(a)` everywhere, or `+inf` when some
/// zero-cost entry carries positive reward.
pub fn ratio_bound_alpha(inst: &Instance) -> f64 {
    let mut alpha: f64 = 0.0;
    for (&r, &c) in inst.rewards.iter().zip(&inst.costs) {
        if c > 0.0 {
            alpha = alpha.max(r / c);
        } else if r > 0.0 {
            return f64::INFINITY;
        }
    }
    alpha
}
