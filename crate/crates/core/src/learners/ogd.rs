use crate::error::{Error, Result};

/// Projected online gradient descent on the dual multiplier over `[0, lambda_bar]`,
/// starting from 0. The loss in round `t` is `lambda * g_t` with
/// `g_t = B/T - c_t(a_t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ogd {
    lambda: f64,
    eta: f64,
    lambda_bar: f64,
}

impl Ogd {
    pub fn new(eta: f64, lambda_bar: f64) -> Result<Self> {
        if !(eta.is_finite() && eta >= 0.0 && lambda_bar.is_finite() && lambda_bar >= 0.0) {
            return Err(Error::Precondition(format!(
                "OGD needs finite non-negative eta ({eta}) and lambda_bar ({lambda_bar})"
            )));
        }
        Ok(Self { lambda: 0.0, eta, lambda_bar })
    }

    /// Starts from an arbitrary multiplier, clamped into range.
    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda.clamp(0.0, self.lambda_bar);
        self
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn lambda_bar(&self) -> f64 {
        self.lambda_bar
    }

    pub fn step(&mut self, gradient: f64) {
        debug_assert!(gradient.abs() <= 1.0 + 1e-12, "gradient {gradient} outside [-1, 1]");
        self.lambda = (self.lambda - self.eta * gradient).clamp(0.0, self.lambda_bar);
    }
}

/// Right-hand side `lambda_bar^2 / eta + eta T` of the OGD regret guarantee.
pub fn dual_regret_bound(eta: f64, lambda_bar: f64, horizon: usize) -> f64 {
    if lambda_bar == 0.0 {
        return 0.0;
    }
    lambda_bar * lambda_bar / eta + eta * horizon as f64
}

/// `sum_t lambda_t g_t - u sum_t g_t` for comparator `u`.
pub fn dual_regret(lambdas: &[f64], gradients: &[f64], comparator: f64) -> f64 {
    lambdas.iter().zip(gradients).map(|(l, g)| (l - comparator) * g).sum()
}
