//! Exact (or grid-exact) benchmark values: the per-window pacing optimum,
//! the best fixed distribution under sliding-window caps, and the best
//! strategy of a finite family inside the EMD ball.

use serde::{Deserialize, Serialize};

use crate::emd::in_g;
use crate::error::{Error, Result};
use crate::model::{expected_total_reward, Instance, MixedAction, Strategy, NULL_ACTION};

const TIE_TOL: f64 = 1e-12;

/// A benchmark value together with a strategy attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub value: f64,
    #[serde(rename = "witness")]
    pub witness_strategy: Strategy,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub per_window_values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    value: f64,
    cost: f64,
    // (lower, upper) action index; singles use (a, a)
    key: (usize, usize),
    weight_upper: f64,
}

impl Candidate {
    fn beats(&self, other: &Candidate) -> bool {
        if (self.value - other.value).abs() > TIE_TOL {
            return self.value > other.value;
        }
        if (self.cost - other.cost).abs() > TIE_TOL {
            return self.cost < other.cost;
        }
        self.key < other.key
    }
}

/// `max_x sum_a x_a R_a  s.t.  sum_a x_a C_a <= cap` over the simplex.
///
/// The optimum sits on a vertex of the simplex cut by one halfspace: a single
/// feasible action, or a two-action mixture that spends exactly `cap`. Ties
/// go to the cheaper candidate, then to lower action indices.
pub fn best_fixed_single_constraint(
    rewards: &[f64],
    costs: &[f64],
    cap: f64,
) -> Result<(MixedAction, f64)> {
    let k = rewards.len();
    if k == 0 || costs.len() != k {
        return Err(Error::Dimension(format!("{} rewards, {} costs", k, costs.len())));
    }
    if rewards.iter().chain(costs).any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Precondition("rewards and costs must be finite and non-negative".into()));
    }
    if !(cap >= 0.0) {
        return Err(Error::Precondition(format!("cap {cap} must be non-negative")));
    }
    if rewards[NULL_ACTION] != 0.0 || costs[NULL_ACTION] != 0.0 {
        return Err(Error::Precondition("action 0 must be the free null action".into()));
    }

    let mut best: Option<Candidate> = None;
    let mut consider = |cand: Candidate| {
        if best.as_ref().is_none_or(|b| cand.beats(b)) {
            best = Some(cand);
        }
    };
    for a in 0..k {
        if costs[a] <= cap + TIE_TOL {
            consider(Candidate { value: rewards[a], cost: costs[a], key: (a, a), weight_upper: 0.0 });
        }
    }
    for a in 0..k {
        for b in (a + 1)..k {
            let (lo, hi) = if costs[a] < costs[b] { (a, b) } else { (b, a) };
            if !(costs[lo] < cap && cap < costs[hi]) {
                continue;
            }
            let theta = (cap - costs[lo]) / (costs[hi] - costs[lo]);
            let value = rewards[lo] + theta * (rewards[hi] - rewards[lo]);
            let key = (a, b);
            // weight_upper is the mass on the larger index of the pair
            let weight_upper = if hi == b { theta } else { 1.0 - theta };
            consider(Candidate { value, cost: cap, key, weight_upper });
        }
    }
    let best = best.expect("null action is always feasible");
    let mut probs = vec![0.0; k];
    let (a, b) = best.key;
    if a == b {
        probs[a] = 1.0;
    } else {
        probs[a] = 1.0 - best.weight_upper;
        probs[b] = best.weight_upper;
    }
    Ok((MixedAction::new(probs)?, best.value))
}

/// Sum over disjoint length-`w` windows of the best fixed distribution that
/// spends at most `Bw/T` in the window.
pub fn opt_disjoint_windows(inst: &Instance, w: usize) -> Result<OptResult> {
    let horizon = inst.horizon();
    if w == 0 || !horizon.is_multiple_of(w) {
        return Err(Error::Precondition(format!("window {w} must divide horizon {horizon}")));
    }
    let k = inst.num_actions();
    let cap = inst.budget() * w as f64 / horizon as f64;
    let mut per_window = Vec::with_capacity(horizon / w);
    let mut per_round = Vec::with_capacity(horizon);
    for start in (0..horizon).step_by(w) {
        let mut r_sum = vec![0.0; k];
        let mut c_sum = vec![0.0; k];
        for t in start..start + w {
            for a in 0..k {
                r_sum[a] += inst.reward(t, a);
                c_sum[a] += inst.cost(t, a);
            }
        }
        let (x, value) = best_fixed_single_constraint(&r_sum, &c_sum, cap)?;
        per_window.push(value);
        per_round.extend(std::iter::repeat_n(x, w));
    }
    Ok(OptResult {
        value: per_window.iter().sum(),
        witness_strategy: Strategy::new(per_round)?,
        per_window_values: Some(per_window),
    })
}

/// Points of the simplex over `num_actions` actions whose coordinates are
/// multiples of `1/m`, in lexicographic order of the counts.
pub fn simplex_grid(num_actions: usize, m: usize) -> Vec<MixedAction> {
    fn rec(slot: usize, left: usize, counts: &mut Vec<usize>, m: usize, out: &mut Vec<MixedAction>) {
        if slot + 1 == counts.len() {
            counts[slot] = left;
            let probs = counts.iter().map(|&c| c as f64 / m as f64).collect();
            out.push(MixedAction::new(probs).expect("grid point is a distribution"));
            return;
        }
        for c in 0..=left {
            counts[slot] = c;
            rec(slot + 1, left - c, counts, m, out);
        }
    }
    let mut out = Vec::new();
    if num_actions > 0 {
        rec(0, m, &mut vec![0; num_actions], m, &mut out);
    }
    out
}

/// Grid cover of the simplex: every non-null coordinate is a multiple of
/// `eps / |A|` and whatever mass is left goes to the null action.
pub fn epsilon_cover(num_actions: usize, eps: f64) -> Result<Vec<MixedAction>> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Precondition(format!("cover radius {eps} must be positive")));
    }
    let step = eps / num_actions as f64;
    let max_units = (1.0 / step + 1e-9).floor() as usize;
    let mut out = Vec::new();
    let mut units = vec![0usize; num_actions.saturating_sub(1)];
    loop {
        let used: usize = units.iter().sum();
        if used as f64 * step <= 1.0 + 1e-12 {
            let mut probs = Vec::with_capacity(num_actions);
            let rest: f64 = units.iter().map(|&u| u as f64 * step).sum();
            probs.push((1.0 - rest).max(0.0));
            probs.extend(units.iter().map(|&u| u as f64 * step));
            out.push(MixedAction::new(probs)?);
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == units.len() {
                return Ok(out);
            }
            units[i] += 1;
            if units[i] <= max_units {
                break;
            }
            units[i] = 0;
            i += 1;
        }
    }
}

/// Best fixed distribution on a simplex grid of step `grid_step` that spends
/// at most `Bw/T` in every length-`w` sliding window.
///
/// Approximate: the value is within `|A| * grid_step * T` of the exact
/// optimum.
pub fn opt_fixed_sliding(inst: &Instance, w: usize, grid_step: f64) -> Result<OptResult> {
    let horizon = inst.horizon();
    if w == 0 || w > horizon {
        return Err(Error::Precondition(format!("window {w} outside [1, {horizon}]")));
    }
    if !(grid_step > 0.0 && grid_step <= 1.0) {
        return Err(Error::Precondition(format!("grid step {grid_step} outside (0, 1]")));
    }
    let k = inst.num_actions();
    let m = (1.0 / grid_step + 1e-9).floor().max(1.0) as usize;
    let cap = inst.budget() * w as f64 / horizon as f64;

    let mut totals = vec![0.0; k];
    let mut prefix = vec![vec![0.0; k]; horizon + 1];
    for t in 0..horizon {
        for a in 0..k {
            totals[a] += inst.reward(t, a);
            prefix[t + 1][a] = prefix[t][a] + inst.cost(t, a);
        }
    }
    let windows: Vec<Vec<f64>> = (0..=horizon - w)
        .map(|s| (0..k).map(|a| prefix[s + w][a] - prefix[s][a]).collect())
        .collect();

    let mut best: Option<(f64, f64, MixedAction)> = None;
    for x in simplex_grid(k, m) {
        let p = x.probs();
        let worst = windows
            .iter()
            .map(|win| win.iter().zip(p).map(|(c, q)| c * q).sum::<f64>())
            .fold(0.0, f64::max);
        if worst > cap + TIE_TOL {
            continue;
        }
        let value: f64 = totals.iter().zip(p).map(|(r, q)| r * q).sum();
        let better = match &best {
            None => true,
            Some((bv, bc, _)) => {
                value > bv + TIE_TOL || ((value - bv).abs() <= TIE_TOL && worst < bc - TIE_TOL)
            }
        };
        if better {
            best = Some((value, worst, x));
        }
    }
    let (_, _, x) = best.expect("all-null grid point is feasible");
    let witness = Strategy::constant(x, horizon);
    Ok(OptResult {
        value: expected_total_reward(inst, &witness)?,
        witness_strategy: witness,
        per_window_values: None,
    })
}

/// Best expected reward among members of `family` lying in `G(radius)`; the
/// all-null strategy (value 0) when none do.
pub fn opt_finite_family(inst: &Instance, family: &[Strategy], radius: f64) -> Result<OptResult> {
    if family.is_empty() {
        return Err(Error::Precondition("strategy family is empty".into()));
    }
    let mut best: Option<(f64, &Strategy)> = None;
    for strat in family {
        if !in_g(strat, inst, radius)? {
            continue;
        }
        let value = expected_total_reward(inst, strat)?;
        if best.is_none_or(|(bv, _)| value > bv + TIE_TOL) {
            best = Some((value, strat));
        }
    }
    Ok(match best {
        Some((value, strat)) => {
            OptResult { value, witness_strategy: strat.clone(), per_window_values: None }
        }
        None => OptResult {
            value: 0.0,
            witness_strategy: Strategy::all_null(inst.num_actions(), inst.horizon()),
            per_window_values: None,
        },
    })
}
