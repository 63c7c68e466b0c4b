//! Earth Mover's Distance between spending patterns on the line metric, and
//! the distance from a pattern to the set of equal-mass sub-pacing patterns.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{expected_spending, Instance, SpendingPattern, Strategy};

/// Absolute tolerance for equal-mass checks and distance comparisons.
pub const EMD_TOL: f64 = 1e-7;

/// Minimum distance to the sub-pacing set with an optimal witness pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmdResult {
    pub distance: f64,
    pub witness: SpendingPattern,
}

/// Unnormalized EMD `sum_t |C_t - D_t|` over prefix sums of two patterns of
/// equal total mass.
pub fn emd_between(c: &SpendingPattern, d: &SpendingPattern) -> Result<f64> {
    if c.len() != d.len() {
        return Err(Error::Dimension(format!("pattern lengths {} and {}", c.len(), d.len())));
    }
    let (left, right) = (c.total(), d.total());
    if (left - right).abs() > EMD_TOL {
        return Err(Error::MassMismatch { left, right });
    }
    let mut gap = 0.0;
    let mut total = 0.0;
    for (a, b) in c.spend().iter().zip(d.spend()) {
        gap += a - b;
        total += gap.abs();
    }
    Ok(total)
}

/// Closest sub-pacing pattern (entries in `[0, B/T]`, same mass as `c`).
///
/// Solves `min sum_t |C_t - D_t|` over cumulative witnesses `D` with
/// increments in `[0, B/T]`, `D_0 = 0` and `D_T = C_T`. The cost-to-go
/// `f_t(D)` is convex piecewise linear in `D`; it is kept as two heaps of
/// breakpoints, the right one shifted lazily by `B/T` each round. The witness
/// is recovered backwards by clamping each stage minimizer into the window
/// `[D_t - B/T, D_t]`. `O(T log T)`.
pub fn min_emd_to_subpacing(c: &SpendingPattern, budget: f64, horizon: usize) -> Result<EmdResult> {
    if horizon == 0 || c.len() != horizon {
        return Err(Error::Dimension(format!(
            "pattern of length {} for horizon {horizon}",
            c.len()
        )));
    }
    let mass = c.total();
    if mass > budget + EMD_TOL {
        return Err(Error::Infeasible(format!(
            "pattern spends {mass} > budget {budget}; no equal-mass sub-pacing pattern exists"
        )));
    }
    let rate = budget / horizon as f64;
    let prefix = c.prefix_sums();

    // Slopes of f_t never exceed t in magnitude, so T + 2 stacked breakpoints
    // at 0 act as the walls of the initial indicator of {0}.
    let walls = horizon + 2;
    let mut left: BinaryHeap<Key> = std::iter::repeat_n(Key(0.0), walls).collect();
    let mut right: BinaryHeap<Reverse<Key>> =
        std::iter::repeat_n(Reverse(Key(0.0)), walls).collect();
    let mut shift = 0.0;
    let mut minimizers = Vec::with_capacity(horizon);
    for &a in &prefix {
        shift += rate;
        // (x - a)^+
        left.push(Key(a));
        let top = left.pop().map_or(a, |k| k.0);
        right.push(Reverse(Key(top - shift)));
        // (a - x)^+
        right.push(Reverse(Key(a - shift)));
        let low = right.pop().map_or(a, |k| k.0 .0 + shift);
        left.push(Key(low));
        minimizers.push(left.peek().map_or(0.0, |k| k.0));
    }

    let mut cumulative = vec![0.0; horizon + 1];
    cumulative[horizon] = mass;
    for t in (1..horizon).rev() {
        let next = cumulative[t + 1];
        cumulative[t] = minimizers[t - 1].clamp((next - rate).max(0.0), next);
    }
    let witness = cumulative.windows(2).map(|w| (w[1] - w[0]).clamp(0.0, rate)).collect();
    let witness = SpendingPattern::new(witness)?;
    let distance = emd_between(c, &witness)?;
    Ok(EmdResult { distance, witness })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Whether the expected spending of `strat` is within EMD `radius` of some
/// equal-mass sub-pacing pattern.
pub fn in_g(strat: &Strategy, inst: &Instance, radius: f64) -> Result<bool> {
    let spend = expected_spending(inst, strat)?;
    if spend.total() > inst.budget() + EMD_TOL {
        return Ok(false);
    }
    let best = min_emd_to_subpacing(&spend, inst.budget(), inst.horizon())?;
    Ok(best.distance <= radius + EMD_TOL)
}
