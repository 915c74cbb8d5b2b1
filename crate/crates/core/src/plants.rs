//! Perturbed integrator chain and the disturbance signal library.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::numerics::sgn;
use crate::{Error, Result};

/// A scalar function of state and time such as the drift or the input gain.
pub trait StateFn {
    fn eval(&self, x: &[f64], t: f64) -> f64;
}

impl<F> StateFn for F
where
    F: Fn(&[f64], f64) -> f64,
{
    fn eval(&self, x: &[f64], t: f64) -> f64 {
        self(x, t)
    }
}

/// Named state functions that scenario files can refer to.
#[derive(Debug, Clone, PartialEq)]
pub enum Handle {
    Zero,
    Constant(f64),
    /// `offset + sum_i coeffs[i] * x[i]`.
    Linear { coeffs: Vec<f64>, offset: f64 },
    /// `amplitude * sin(omega * t + phase)`, independent of the state.
    Sine { amplitude: f64, omega: f64, phase: f64 },
}

impl StateFn for Handle {
    fn eval(&self, x: &[f64], t: f64) -> f64 {
        match self {
            Handle::Zero => 0.0,
            Handle::Constant(c) => *c,
            Handle::Linear { coeffs, offset } => offset + coeffs.iter().zip(x).map(|(c, xi)| c * xi).sum::<f64>(),
            Handle::Sine { amplitude, omega, phase } => amplitude * libm::sin(omega * t + phase),
        }
    }
}

/// Time-varying matched disturbance with a documented bound `k` on `|d'|`.
///
/// Equality of `Custom` signals compares function addresses, which is only a
/// best-effort identity check.
#[allow(unpredictable_function_pointer_comparisons)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DisturbanceSignal {
    /// `amplitude * sin(omega * t + phase)`.
    Sine { amplitude: f64, omega: f64, phase: f64 },
    /// `amplitude * sin(omega * t) + slope * 0.5 t (sgn(t) + 1)`.
    SinePlusRamp { amplitude: f64, omega: f64, slope: f64 },
    Constant(f64),
    Custom {
        f: fn(f64) -> f64,
        k_bound: Option<f64>,
    },
}

impl DisturbanceSignal {
    /// `sin(2 pi t)`.
    pub fn unit_sine() -> Self {
        DisturbanceSignal::Sine {
            amplitude: 1.0,
            omega: 2.0 * PI,
            phase: 0.0,
        }
    }

    /// `sin(2 pi t) + ramp(t)` with `ramp(t) = 0.5 t (sgn(t) + 1)`.
    pub fn unit_sine_plus_ramp() -> Self {
        DisturbanceSignal::SinePlusRamp {
            amplitude: 1.0,
            omega: 2.0 * PI,
            slope: 1.0,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            DisturbanceSignal::Sine { amplitude, omega, phase } => amplitude * libm::sin(omega * t + phase),
            DisturbanceSignal::SinePlusRamp { amplitude, omega, slope } => {
                amplitude * libm::sin(omega * t) + slope * 0.5 * t * (sgn(t) + 1.0)
            }
            DisturbanceSignal::Constant(c) => c,
            DisturbanceSignal::Custom { f, .. } => f(t),
        }
    }

    /// Bound `k` with `|d'(t)| <= k`.
    pub fn rate_bound(&self) -> Result<f64> {
        match *self {
            DisturbanceSignal::Sine { amplitude, omega, .. } => Ok((amplitude * omega).abs()),
            DisturbanceSignal::SinePlusRamp { amplitude, omega, slope } => Ok((amplitude * omega).abs() + slope.abs()),
            DisturbanceSignal::Constant(_) => Ok(0.0),
            DisturbanceSignal::Custom { k_bound, .. } => k_bound.ok_or(Error::MissingBound),
        }
    }

    /// Bound on `|d|` when the signal is bounded.
    pub fn magnitude_bound(&self) -> Option<f64> {
        match *self {
            DisturbanceSignal::Sine { amplitude, .. } => Some(amplitude.abs()),
            DisturbanceSignal::Constant(c) => Some(c.abs()),
            _ => None,
        }
    }
}

/// `x_1' = x_2, ..., x_n' = f_n + f_delta + b u + d_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainPlant {
    pub order: usize,
    pub f_n: Handle,
    pub f_delta: Handle,
    pub f_max: f64,
    pub b: Handle,
    pub d0: DisturbanceSignal,
    /// Declared bound on `|d_0|`; checked at runtime when present.
    pub d_max: Option<f64>,
}

impl ChainPlant {
    /// Pure integrator chain with unit input gain and no drift.
    pub fn integrator_chain(order: usize, d0: DisturbanceSignal) -> Self {
        Self {
            order,
            f_n: Handle::Zero,
            f_delta: Handle::Zero,
            f_max: 0.0,
            b: Handle::Constant(1.0),
            d0,
            d_max: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::Domain("plant order must be at least 1"));
        }
        if !(self.f_max >= 0.0) {
            return Err(Error::InvalidGains("f_max must be nonnegative"));
        }
        if let Some(d) = self.d_max {
            if !(d >= 0.0) {
                return Err(Error::InvalidGains("d_max must be nonnegative"));
            }
        }
        Ok(())
    }

    /// Lumped matched perturbation `d = d_0 + f_delta` seen by the observer.
    pub fn lumped_disturbance(&self, x: &[f64], t: f64) -> f64 {
        self.d0.value(t) + self.f_delta.eval(x, t)
    }

    pub fn rhs(&self, x: &[f64], t: f64, u: f64) -> Result<Vec<f64>> {
        let mut dx = alloc::vec![0.0; self.order];
        self.rhs_into(x, t, u, &mut dx)?;
        Ok(dx)
    }

    pub fn rhs_into(&self, x: &[f64], t: f64, u: f64, dx: &mut [f64]) -> Result<()> {
        let n = self.order;
        if x.len() != n || dx.len() != n {
            return Err(Error::Dimension { expected: n, got: x.len() });
        }
        dx[..n - 1].copy_from_slice(&x[1..]);
        dx[n - 1] = self.f_n.eval(x, t) + self.f_delta.eval(x, t) + self.b.eval(x, t) * u + self.d0.value(t);
        if dx.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NumericBlowup { time: t })
        }
    }

    /// Runtime check of the boundedness assumptions on `f_delta` and `d_0`.
    pub fn check_assumptions(&self, x: &[f64], t: f64) -> Result<()> {
        if self.f_delta.eval(x, t).abs() > self.f_max {
            return Err(Error::Assumption {
                time: t,
                what: "|f_delta| exceeds f_max",
            });
        }
        if let Some(d_max) = self.d_max {
            if self.d0.value(t).abs() > d_max {
                return Err(Error::Assumption {
                    time: t,
                    what: "|d_0| exceeds d_max",
                });
            }
        }
        Ok(())
    }
}
