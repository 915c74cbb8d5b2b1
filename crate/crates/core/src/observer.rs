//! Adaptive disturbance observer with non-monotone gain adaptation.
//!
//! ```text
//! d_hat  = lambda (x_n - zeta)
//! zeta'  = f_n + b u + d_hat - (k_hat / lambda) sgn(d_tilde) - s / lambda
//! k_hat' = -tau k_hat + mu |s|,   k_hat(0) > 0
//! ```
//!
//! The disturbance error `d_tilde = d - d_hat` is not measurable. Its sign is
//! recovered from `omega(t) = x_n - int (f_n + b u + d_hat)`, whose derivative
//! is `d_tilde`, as `sgn(omega(t) - omega(t - tau_d))`.

use crate::controllers::{AdoGains, EqvGains};
use crate::numerics::sgn_i8;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdoParams {
    pub lambda: f64,
    pub tau: f64,
    pub mu: f64,
    /// Delay `tau_d` of the sign reconstruction, in seconds.
    pub delay: f64,
}

impl AdoParams {
    pub fn new(lambda: f64, tau: f64, mu: f64, delay: f64) -> Result<Self> {
        if !(lambda > 0.5) {
            return Err(Error::InvalidGains("lambda must exceed 1/2"));
        }
        if !(tau > 0.0 && mu > 0.0) {
            return Err(Error::InvalidGains("tau and mu must be positive"));
        }
        if !(tau - mu - 1.0 > 0.0) {
            return Err(Error::InvalidGains("tau must exceed mu + 1"));
        }
        if !(delay > 0.0) {
            return Err(Error::InvalidGains("observer delay must be positive"));
        }
        Ok(Self { lambda, tau, mu, delay })
    }

    /// `tau_0` in the decomposition `tau = mu + 1 + tau_0`.
    pub fn tau0(&self) -> f64 {
        self.tau - self.mu - 1.0
    }

    pub fn d_hat(&self, x_n: f64, zeta: f64) -> f64 {
        self.lambda * (x_n - zeta)
    }

    /// `zeta'` given the control `u` applied at `(x, t)`.
    #[allow(clippy::too_many_arguments)]
    pub fn zeta_rate(&self, g: &EqvGains<'_>, x: &[f64], t: f64, u: f64, st: &AdoState, sgn_dtilde: i8, s: f64) -> f64 {
        let d_hat = self.d_hat(x[x.len() - 1], st.zeta);
        g.f_n.eval(x, t) + g.b.eval(x, t) * u + d_hat - st.k_hat / self.lambda * f64::from(sgn_dtilde) - s / self.lambda
    }

    pub fn k_hat_rate(&self, k_hat: f64, s: f64) -> f64 {
        -self.tau * k_hat + self.mu * s.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdoState {
    pub zeta: f64,
    pub k_hat: f64,
    /// `omega` one delay ago; `None` until a full delay has elapsed.
    pub omega_prev: Option<f64>,
    pub omega: f64,
}

impl AdoState {
    pub fn new(zeta: f64, k_hat: f64) -> Result<Self> {
        if !(k_hat > 0.0) {
            return Err(Error::InvalidGains("initial k_hat must be positive"));
        }
        Ok(Self {
            zeta,
            k_hat,
            omega_prev: None,
            omega: 0.0,
        })
    }

    /// `sgn(omega(t) - omega(t - tau_d))`, zero before the first delay window.
    pub fn sign_d_tilde(&self) -> i8 {
        match self.omega_prev {
            Some(prev) => sgn_i8(self.omega - prev),
            None => 0,
        }
    }
}

/// Estimation errors, available only to the simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisturbanceErrors {
    pub d_tilde: f64,
    pub k_tilde: f64,
}

impl DisturbanceErrors {
    pub fn from_truth(d: f64, d_hat: f64, k: f64, k_hat: f64) -> Self {
        Self {
            d_tilde: d - d_hat,
            k_tilde: k - k_hat,
        }
    }
}

/// Constants of the ultimate-boundedness estimate `V' <= -gamma V + delta_bar`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub gamma: f64,
    pub theta: f64,
    pub delta_bar: f64,
    /// Radius `B = sqrt(2 delta_bar / (gamma - theta))` of the ball that
    /// eventually contains `(s, d_tilde, k_tilde)`.
    pub ultimate_bound: f64,
}

impl Bounds {
    pub fn new(gamma: f64, theta: f64, delta_bar: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < gamma) {
            return Err(Error::InvalidSplit { theta, gamma });
        }
        Ok(Self {
            gamma,
            theta,
            delta_bar,
            ultimate_bound: libm::sqrt(2.0 * delta_bar / (gamma - theta)),
        })
    }

    /// Level `R = delta_bar / (gamma - theta)` of `V` matching the ball.
    pub fn level(&self) -> f64 {
        self.delta_bar / (self.gamma - self.theta)
    }

    pub fn reaching_time(&self, v0: f64) -> Result<f64> {
        reaching_time_bound(v0, self.gamma, self.theta, self.delta_bar)
    }
}

/// `gamma = min(kappa - mu/2, lambda - 1/2, tau_0 / 2)`,
/// `delta_bar = tau k^2 / 2`, `B = sqrt(2 delta_bar / (gamma - theta))`.
pub fn theoretical_bounds(p: &AdoParams, g: &AdoGains, k_true: f64, theta: f64) -> Result<Bounds> {
    let gamma = decay_rate(p, g)?;
    Bounds::new(gamma, theta, 0.5 * p.tau * k_true * k_true)
}

/// [`theoretical_bounds`] with the split `theta = gamma / 2`.
pub fn default_bounds(p: &AdoParams, g: &AdoGains, k_true: f64) -> Result<Bounds> {
    let gamma = decay_rate(p, g)?;
    theoretical_bounds(p, g, k_true, 0.5 * gamma)
}

fn decay_rate(p: &AdoParams, g: &AdoGains) -> Result<f64> {
    let kappa_bar = g.kappa - 0.5 * p.mu;
    let lambda_bar = p.lambda - 0.5;
    let tau0 = p.tau0();
    if !(kappa_bar > 0.0 && lambda_bar > 0.0 && tau0 > 0.0) {
        return Err(Error::InvalidGains("kappa - mu/2, lambda - 1/2 and tau_0 must be positive"));
    }
    Ok(kappa_bar.min(lambda_bar).min(0.5 * tau0))
}

/// Time for `V` to enter the level `delta_bar / (gamma - theta)`; zero when
/// `V(0)` is already inside.
pub fn reaching_time_bound(v0: f64, gamma: f64, theta: f64, delta_bar: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < gamma) {
        return Err(Error::InvalidSplit { theta, gamma });
    }
    if v0 <= delta_bar / (gamma - theta) {
        return Ok(0.0);
    }
    let ratio = (v0 - delta_bar / gamma) / (delta_bar * (1.0 / (gamma - theta) - 1.0 / gamma));
    Ok(libm::log(ratio) / gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::ManifoldSpec;
    use crate::plants::Handle;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::PI;

    fn example_params() -> AdoParams {
        AdoParams::new(5.0, 5.0, 2.0, 0.001).unwrap()
    }

    #[test]
    fn d_hat_examples() {
        let p = example_params();
        assert_eq!(p.d_hat(0.7, 0.7), 0.0);
        assert_abs_diff_eq!(p.d_hat(1.2, 1.0), 1.0, epsilon = 1e-14);
        let p50 = AdoParams::new(50.0, 5.0, 2.0, 0.001).unwrap();
        assert_abs_diff_eq!(p50.d_hat(0.01, 0.0), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn zeta_rate_examples() {
        let p = example_params();
        let spec = ManifoldSpec::default();
        let zero = Handle::Zero;
        let one = Handle::Constant(1.0);
        let g = EqvGains::new(&spec, &zero, &one);

        let st = AdoState { zeta: 0.0, k_hat: 1.0, omega_prev: None, omega: 0.0 };
        assert_eq!(p.zeta_rate(&g, &[0.0; 3], 0.0, 0.0, &st, 0, 0.0), 0.0);

        // d_hat = 5 (0.1 - 0) = 0.5, k_hat = 2.
        let st = AdoState { zeta: 0.0, k_hat: 2.0, omega_prev: None, omega: 0.0 };
        let x = [0.0, 0.0, 0.1];
        assert_abs_diff_eq!(p.zeta_rate(&g, &x, 0.0, 1.0, &st, 1, 0.0), 1.1, epsilon = 1e-14);
        assert_abs_diff_eq!(p.zeta_rate(&g, &x, 0.0, 1.0, &st, 0, 5.0), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn sign_reconstruction() {
        let mut st = AdoState::new(0.0, 1.0).unwrap();
        assert_eq!(st.sign_d_tilde(), 0);
        st.omega = 0.4;
        st.omega_prev = Some(0.4);
        assert_eq!(st.sign_d_tilde(), 0);
        st.omega = 0.3;
        st.omega_prev = Some(0.1);
        assert_eq!(st.sign_d_tilde(), 1);
        st.omega = -0.2;
        st.omega_prev = Some(0.0);
        assert_eq!(st.sign_d_tilde(), -1);
        assert!(AdoState::new(0.0, 0.0).is_err());
    }

    #[test]
    fn k_hat_rate_examples() {
        let p = example_params();
        assert_eq!(p.k_hat_rate(1.0, 0.0), -5.0);
        assert_abs_diff_eq!(p.k_hat_rate(0.4, 1.0), 0.0, epsilon = 1e-15);
        assert_eq!(p.k_hat_rate(0.0, 0.0), 0.0);
    }

    #[test]
    fn params_validation() {
        assert_eq!(example_params().tau0(), 2.0);
        assert!(AdoParams::new(0.5, 5.0, 2.0, 0.001).is_err());
        assert!(AdoParams::new(5.0, 3.0, 2.0, 0.001).is_err());
        assert!(AdoParams::new(5.0, 5.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn bounds_examples() {
        let p = example_params();
        let g = AdoGains::new(5.0, 0.0).unwrap();
        let b = default_bounds(&p, &g, 2.0 * PI).unwrap();
        assert_eq!(b.gamma, 1.0);
        assert_eq!(b.theta, 0.5);

        // delta_bar = tau k^2 / 2 = 1 for tau = 2, k = 1; gamma = 1, theta = 0.5 -> B = 2.
        let p2 = AdoParams { tau: 2.0, mu: 0.5, ..p };
        assert_eq!(theoretical_bounds(&p2, &g, 1.0, 0.1).unwrap().delta_bar, 1.0);
        let b = Bounds::new(1.0, 0.5, 1.0).unwrap();
        assert_abs_diff_eq!(b.ultimate_bound, 2.0, epsilon = 1e-15);
        assert_eq!(b.level(), 2.0);

        assert!(matches!(theoretical_bounds(&p, &g, 1.0, 1.0), Err(Error::InvalidSplit { .. })));
        assert!(theoretical_bounds(&p, &AdoGains::new(1.0, 0.0).unwrap(), 1.0, 0.1).is_err());
    }

    #[test]
    fn reaching_time_examples() {
        assert_abs_diff_eq!(reaching_time_bound(10.0, 1.0, 0.5, 1.0).unwrap(), 9f64.ln(), epsilon = 1e-15);
        assert_eq!(reaching_time_bound(2.0, 1.0, 0.5, 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(reaching_time_bound(3.0, 1.0, 0.5, 1.0).unwrap(), 2f64.ln(), epsilon = 1e-15);
        assert!(reaching_time_bound(3.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn reaching_time_matches_comparison_ode() {
        // V' = -gamma V + delta_bar reaches the level exactly at the bound.
        let (gamma, theta, delta_bar, v0) = (1.5, 0.4, 2.0, 40.0);
        let t = reaching_time_bound(v0, gamma, theta, delta_bar).unwrap();
        let v_at = delta_bar / gamma + (v0 - delta_bar / gamma) * libm::exp(-gamma * t);
        assert_abs_diff_eq!(v_at, delta_bar / (gamma - theta), epsilon = 1e-12);
    }
}
