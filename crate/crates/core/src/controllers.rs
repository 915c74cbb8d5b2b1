//! Control laws on the integral-terminal manifold.
//!
//! Every law has the form `u = b^{-1} (u_eqv + inner)` where `u_eqv` cancels
//! the nominal drift and the manifold terms in `s'`, and `inner` is one of the
//! discontinuous switching term, the super-twisting term or the
//! observer-based term.

use crate::manifold::ManifoldSpec;
use crate::numerics::{sgn, spow};
use crate::plants::StateFn;
use crate::{Error, Result};

/// Model knowledge used by the equivalent control.
#[derive(Clone, Copy)]
pub struct EqvGains<'a> {
    pub spec: &'a ManifoldSpec,
    pub f_n: &'a dyn StateFn,
    pub b: &'a dyn StateFn,
}

impl<'a> EqvGains<'a> {
    pub fn new(spec: &'a ManifoldSpec, f_n: &'a dyn StateFn, b: &'a dyn StateFn) -> Self {
        Self { spec, f_n, b }
    }

    /// `u_eqv = -f_n(x, t) - sum_i C_i sig(x_i)^{alpha_i}`.
    pub fn u_eqv(&self, x: &[f64], t: f64) -> f64 {
        -self.f_n.eval(x, t) + self.spec.z_rate_unchecked(x)
    }

    /// `b(x, t)^{-1} (u_eqv + inner)`.
    pub fn total_control(&self, inner: f64, x: &[f64], t: f64) -> Result<f64> {
        let b = self.b.eval(x, t);
        if !(b.abs() >= 1e-12) {
            return Err(Error::SingularGain { time: t });
        }
        Ok((self.u_eqv(x, t) + inner) / b)
    }
}

/// Gains of the discontinuous law `-(eta + d_max + f_max) sgn(s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisGains {
    pub eta: f64,
    pub d_max: f64,
    pub f_max: f64,
}

impl DisGains {
    pub fn new(eta: f64, d_max: f64, f_max: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::InvalidGains("eta must be positive"));
        }
        if !(d_max >= 0.0 && f_max >= 0.0) {
            return Err(Error::InvalidGains("d_max and f_max must be nonnegative"));
        }
        Ok(Self { eta, d_max, f_max })
    }

    pub fn switching_gain(&self) -> f64 {
        self.eta + self.d_max + self.f_max
    }

    pub fn u_dis(&self, s: f64) -> f64 {
        -self.switching_gain() * sgn(s)
    }
}

/// Super-twisting term `u_con = -k1 sig(s)^{1/2} + v`, `v' = -k2 sgn(s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StcState {
    pub v: f64,
    pub k1: f64,
    pub k2: f64,
    /// Derivative bound the gains were derived from, if any.
    pub rho: Option<f64>,
}

impl StcState {
    pub fn new(k1: f64, k2: f64) -> Result<Self> {
        if !(k1 > 0.0 && k2 > 0.0) {
            return Err(Error::InvalidGains("super-twisting gains must be positive"));
        }
        Ok(Self { v: 0.0, k1, k2, rho: None })
    }

    /// `k1 = 1.5 sqrt(rho)`, `k2 = 1.1 rho` for `|d'| <= rho`.
    pub fn from_rho(rho: f64) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::InvalidGains("rho must be positive"));
        }
        Ok(Self {
            v: 0.0,
            k1: 1.5 * libm::sqrt(rho),
            k2: 1.1 * rho,
            rho: Some(rho),
        })
    }

    pub fn output(&self, s: f64) -> f64 {
        -self.k1 * spow(s, 0.5) + self.v
    }

    pub fn v_rate(&self, s: f64) -> f64 {
        -self.k2 * sgn(s)
    }
}

/// Gains of the observer-based term `-kappa s - kappa2 sig(s)^{1/2} - d_hat`.
/// `kappa2 = 0` is the plain law; `kappa2 > 0` the fast variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdoGains {
    pub kappa: f64,
    pub kappa2: f64,
}

impl AdoGains {
    pub fn new(kappa: f64, kappa2: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::InvalidGains("kappa must be positive"));
        }
        if !(kappa2 >= 0.0) {
            return Err(Error::InvalidGains("kappa2 must be nonnegative"));
        }
        Ok(Self { kappa, kappa2 })
    }

    /// `kappa > mu / 2` keeps the sliding coefficient of the Lyapunov bound
    /// positive.
    pub fn check_adaptation(&self, mu: f64) -> Result<()> {
        if self.kappa > 0.5 * mu {
            Ok(())
        } else {
            Err(Error::InvalidGains("kappa must exceed mu / 2"))
        }
    }

    pub fn u_ado(&self, s: f64, d_hat: f64) -> f64 {
        -self.kappa * s - self.kappa2 * spow(s, 0.5) - d_hat
    }
}
