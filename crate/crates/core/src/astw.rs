//! Adaptive super-twisting baseline with dead-zone gain adaptation.
//!
//! ```text
//! w      = -alpha sig(sigma)^{1/2} + v
//! v'     = -(beta / 2) sgn(sigma),  beta = 2 epsilon alpha
//! alpha' = omega1 sqrt(gamma1 / 2) sgn(|sigma| - mu)   if alpha > alpha_m
//!        = eta                                         otherwise
//! ```

use crate::numerics::{sgn, spow};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AstwParams {
    pub omega1: f64,
    pub gamma1: f64,
    pub eta: f64,
    pub epsilon: f64,
    /// Dead-zone half width on `|sigma|`.
    pub mu: f64,
    pub alpha_m: f64,
}

impl AstwParams {
    pub fn new(omega1: f64, gamma1: f64, eta: f64, epsilon: f64, mu: f64, alpha_m: f64) -> Result<Self> {
        let all = [omega1, gamma1, eta, epsilon, mu, alpha_m];
        if all.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidGains("adaptive super-twisting parameters must be positive"));
        }
        Ok(Self {
            omega1,
            gamma1,
            eta,
            epsilon,
            mu,
            alpha_m,
        })
    }

    pub fn adaptation_rate(&self) -> f64 {
        self.omega1 * libm::sqrt(0.5 * self.gamma1)
    }
}

impl Default for AstwParams {
    /// Baseline values used for the comparison runs. They are not published
    /// constants, only a fixed reproducible choice.
    fn default() -> Self {
        Self {
            omega1: 10.0,
            gamma1: 2.0,
            eta: 0.01,
            epsilon: 1.0,
            mu: 0.05,
            alpha_m: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AstwState {
    pub alpha: f64,
    pub v: f64,
    pub params: AstwParams,
}

impl AstwState {
    pub fn new(alpha: f64, params: AstwParams) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidGains("initial alpha must be positive"));
        }
        Ok(Self {
            alpha: alpha.max(params.alpha_m),
            v: 0.0,
            params,
        })
    }

    pub fn output(&self, sigma: f64) -> f64 {
        -self.alpha * spow(sigma, 0.5) + self.v
    }

    /// `(alpha', v')`.
    pub fn rates(&self, sigma: f64) -> (f64, f64) {
        let p = &self.params;
        let alpha_dot = if self.alpha > p.alpha_m {
            p.adaptation_rate() * sgn(sigma.abs() - p.mu)
        } else {
            p.eta
        };
        (alpha_dot, -p.epsilon * self.alpha * sgn(sigma))
    }

    /// Clamps `alpha` back to the floor after an integration step.
    pub fn enforce_floor(&mut self) {
        if self.alpha < self.params.alpha_m {
            self.alpha = self.params.alpha_m;
        }
    }
}
