use std::sync::Arc;

use rand::Rng;

use super::exp3ix::{default_learning_rate, softmax, PayoffRange};
use crate::error::{Error, Result};
use crate::model::Strategy;
use crate::rng::sample_index;

/// EXP4 with implicit exploration over a finite family of expert strategies.
///
/// At round `t` the arm distribution is the weight mixture of the experts'
/// round-`t` recommendations. Each expert is charged the IX-estimated loss of
/// the sampled arm scaled by the probability it put on that arm.
#[derive(Debug, Clone)]
pub struct Exp4Ix {
    expert_log_weights: Vec<f64>,
    experts: Arc<[Strategy]>,
    learning_rate: f64,
    ix_gamma: f64,
    current_round: usize,
    range: PayoffRange,
}

impl Exp4Ix {
    /// Rate `sqrt(ln N / (n K))` for `N` experts over `K` arms and `horizon` rounds.
    pub fn new(experts: Arc<[Strategy]>, horizon: usize, range: PayoffRange) -> Result<Self> {
        let arms = check_experts(&experts, horizon)?;
        let lr = default_learning_rate(experts.len(), arms, horizon);
        Self::with_rates(experts, horizon, lr, lr / 2.0, range)
    }

    pub fn with_rates(
        experts: Arc<[Strategy]>,
        horizon: usize,
        learning_rate: f64,
        ix_gamma: f64,
        range: PayoffRange,
    ) -> Result<Self> {
        check_experts(&experts, horizon)?;
        Ok(Self {
            expert_log_weights: vec![0.0; experts.len()],
            experts,
            learning_rate,
            ix_gamma,
            current_round: 0,
            range,
        })
    }

    pub fn current_round(&self) -> usize {
        self.current_round
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn expert_weights(&self) -> Vec<f64> {
        softmax(&self.expert_log_weights)
    }

    /// Arm distribution for the current round.
    pub fn distribution(&self) -> Vec<f64> {
        let weights = self.expert_weights();
        let arms = self.experts[0].at(self.current_round).len();
        let mut probs = vec![0.0; arms];
        for (q, expert) in weights.iter().zip(self.experts.iter()) {
            for (p, e) in probs.iter_mut().zip(expert.at(self.current_round).probs()) {
                *p += q * e;
            }
        }
        probs
    }

    /// Feeds the payoff of `arm` (drawn with probability `prob`) and moves to
    /// the next round.
    pub fn update(&mut self, arm: usize, prob: f64, payoff: f64) -> Result<()> {
        let loss = self.range.loss(payoff)?;
        let scaled = loss / (prob + self.ix_gamma);
        if !scaled.is_finite() {
            return Err(Error::NonFinite(format!("loss estimate for arm {arm}")));
        }
        let t = self.current_round;
        for (lw, expert) in self.expert_log_weights.iter_mut().zip(self.experts.iter()) {
            *lw -= self.learning_rate * expert.at(t).probs()[arm] * scaled;
        }
        self.current_round += 1;
        Ok(())
    }

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

/// Returns the arm count shared by every expert.
fn check_experts(experts: &[Strategy], horizon: usize) -> Result<usize> {
    let first = experts.first().ok_or_else(|| Error::Precondition("expert list is empty".into()))?;
    let arms = first.per_round().first().map_or(0, |x| x.len());
    for e in experts {
        if e.horizon() < horizon {
            return Err(Error::Precondition(format!(
                "expert covers {} rounds, need {horizon}",
                e.horizon()
            )));
        }
        if e.per_round().iter().any(|x| x.len() != arms) {
            return Err(Error::Dimension("experts disagree on the arm count".into()));
        }
    }
    Ok(arms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MixedAction;
    use crate::rng::{stream_rng, RngStream};

    fn unit() -> PayoffRange {
        PayoffRange::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn singleton_family_plays_its_expert() {
        let x = MixedAction::new(vec![0.2, 0.3, 0.5]).unwrap();
        let experts: Arc<[Strategy]> = vec![Strategy::constant(x.clone(), 50)].into();
        let mut learner = Exp4Ix::new(experts, 50, unit()).unwrap();
        let mut rng = stream_rng(0, RngStream::Algorithm);
        for _ in 0..50 {
            let d = learner.distribution();
            assert!(d.iter().zip(x.probs()).all(|(a, b)| (a - b).abs() < 1e-15));
            learner.step(&mut rng, |a| a as f64 / 2.0).unwrap();
        }
    }

    #[test]
    fn identical_experts_keep_equal_weights() {
        let x = MixedAction::new(vec![0.5, 0.5]).unwrap();
        let s = Strategy::constant(x, 200);
        let experts: Arc<[Strategy]> = vec![s.clone(), s].into();
        let mut learner = Exp4Ix::new(experts, 200, unit()).unwrap();
        let mut rng = stream_rng(1, RngStream::Algorithm);
        for _ in 0..200 {
            learner.step(&mut rng, |a| if a == 0 { 0.2 } else { 0.9 }).unwrap();
            let w = learner.expert_weights();
            assert_eq!(w[0], w[1]);
        }
    }

    #[test]
    fn better_expert_dominates() {
        let horizon = 2000;
        let good = Strategy::constant(MixedAction::point_mass(2, 0), horizon);
        let bad = Strategy::constant(MixedAction::point_mass(2, 1), horizon);
        let experts: Arc<[Strategy]> = vec![bad, good].into();
        let mut wins = 0;
        for seed in 0..50 {
            let mut learner = Exp4Ix::new(experts.clone(), horizon, unit()).unwrap();
            let mut rng = stream_rng(seed, RngStream::Algorithm);
            for _ in 0..horizon {
                learner.step(&mut rng, |a| if a == 0 { 0.8 } else { 0.3 }).unwrap();
            }
            if learner.expert_weights()[1] > 0.9 {
                wins += 1;
            }
        }
        assert!(wins >= 45, "better expert dominated on {wins}/50 seeds");
    }

    #[test]
    fn empty_family_is_rejected() {
        let experts: Arc<[Strategy]> = Vec::new().into();
        assert!(Exp4Ix::new(experts, 10, unit()).is_err());
    }
}
