use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::sample_index;

/// Payoff interval mapped affinely onto losses in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffRange {
    pub low: f64,
    pub high: f64,
}

impl PayoffRange {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && high > low) {
            return Err(Error::Precondition(format!("payoff range [{low}, {high}] is empty")));
        }
        Ok(Self { low, high })
    }

    /// Range of `r + lambda (B/T - c)` for `lambda` in `[0, lambda_bar]`.
    pub fn lagrangified(lambda_bar: f64) -> Self {
        Self { low: -lambda_bar, high: 1.0 + lambda_bar }
    }

    pub fn loss(&self, payoff: f64) -> Result<f64> {
        if !payoff.is_finite() {
            return Err(Error::NonFinite(format!("payoff {payoff}")));
        }
        Ok((1.0 - (payoff - self.low) / (self.high - self.low)).clamp(0.0, 1.0))
    }
}

/// Learning rate `sqrt(ln N / (n K))` for `N` experts (or arms), `K` arms and
/// horizon `n`.
pub fn default_learning_rate(num_choices: usize, num_arms: usize, horizon: usize) -> f64 {
    if num_choices <= 1 || horizon == 0 {
        return 0.0;
    }
    ((num_choices as f64).ln() / (horizon as f64 * num_arms as f64)).sqrt()
}

/// Softmax of log-weights, shifted by the maximum for stability.
pub(crate) fn softmax(log_weights: &[f64]) -> Vec<f64> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = log_weights.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// EXP3 with implicit exploration over `K` arms.
///
/// Only the sampled arm's weight moves, by the IX estimate
/// `loss / (p + gamma)`.
#[derive(Debug, Clone)]
pub struct Exp3Ix {
    log_weights: Vec<f64>,
    learning_rate: f64,
    ix_gamma: f64,
    horizon_hint: usize,
    range: PayoffRange,
}

impl Exp3Ix {
    /// Tuned for `horizon_hint` rounds: rate `sqrt(ln K / (n K))`, `gamma` half of it.
    pub fn new(num_arms: usize, horizon_hint: usize, range: PayoffRange) -> Result<Self> {
        let lr = default_learning_rate(num_arms, num_arms, horizon_hint);
        Self::with_rates(num_arms, horizon_hint, lr, lr / 2.0, range)
    }

    pub fn with_rates(
        num_arms: usize,
        horizon_hint: usize,
        learning_rate: f64,
        ix_gamma: f64,
        range: PayoffRange,
    ) -> Result<Self> {
        if num_arms == 0 {
            return Err(Error::Precondition("EXP3-IX needs at least one arm".into()));
        }
        if !(learning_rate >= 0.0 && ix_gamma >= 0.0) {
            return Err(Error::Precondition("rates must be non-negative".into()));
        }
        Ok(Self {
            log_weights: vec![0.0; num_arms],
            learning_rate,
            ix_gamma,
            horizon_hint,
            range,
        })
    }

    pub fn reset(&mut self) {
        self.log_weights.iter_mut().for_each(|w| *w = 0.0);
    }

    pub fn num_arms(&self) -> usize {
        self.log_weights.len()
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn ix_gamma(&self) -> f64 {
        self.ix_gamma
    }

    pub fn horizon_hint(&self) -> usize {
        self.horizon_hint
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn distribution(&self) -> Vec<f64> {
        softmax(&self.log_weights)
    }

    /// Feeds the payoff of `arm`, which was drawn with probability `prob`.
    pub fn update(&mut self, arm: usize, prob: f64, payoff: f64) -> Result<()> {
        let loss = self.range.loss(payoff)?;
        let estimate = loss / (prob + self.ix_gamma);
        if !estimate.is_finite() {
            return Err(Error::NonFinite(format!("loss estimate for arm {arm}")));
        }
        self.log_weights[arm] -= self.learning_rate * estimate;
        Ok(())
    }

    /// Samples an arm, asks `feed` for its payoff and updates.
    pub fn step<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
        feed: impl FnOnce(usize) -> f64,
    ) -> Result<usize> {
        let probs = self.distribution();
        let arm = sample_index(&probs, rng);
        self.update(arm, probs[arm], feed(arm))?;
        Ok(arm)
    }
}
