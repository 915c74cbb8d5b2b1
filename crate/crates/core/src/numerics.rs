//! Scalar primitives, the Hurwitz test and the fixed-step integrator.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Standard signum with `sgn(0) = 0`. NaN maps to 0.
#[inline]
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Integer signum, used where the sign is stored rather than multiplied.
#[inline]
pub fn sgn_i8(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// `|x|^alpha sgn(x)` without the exponent check. Callers guarantee
/// `alpha > 0`.
#[inline]
pub(crate) fn spow(x: f64, alpha: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if alpha == 0.5 {
        libm::sqrt(x.abs()).copysign(x)
    } else {
        libm::pow(x.abs(), alpha).copysign(x)
    }
}

/// The signed power map `x -> |x|^a sgn(x)` for a fixed exponent in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedPower {
    exponent: f64,
}

impl SignedPower {
    pub fn new(exponent: f64) -> Result<Self> {
        if exponent > 0.0 && exponent <= 1.0 {
            Ok(Self { exponent })
        } else {
            Err(Error::Domain("signed power exponent must lie in (0, 1]"))
        }
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        spow(x, self.exponent)
    }
}

/// `|x|^alpha sgn(x)`, odd in `x` and zero at the origin.
pub fn sig_pow(x: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::Domain("sig_pow exponent must be positive"));
    }
    Ok(spow(x, alpha))
}

/// Componentwise [`sig_pow`].
pub fn sig_pow_vec(x: &[f64], alpha: &[f64]) -> Result<Vec<f64>> {
    if x.len() != alpha.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            got: alpha.len(),
        });
    }
    x.iter().zip(alpha).map(|(&xi, &ai)| sig_pow(xi, ai)).collect()
}

/// Exponents `(alpha_1, ..., alpha_n)` of the terminal manifold.
///
/// Starts from `alpha_{n+1} = 1`, `alpha_n = alpha` and walks down with
/// `alpha_{i-1} = alpha_i alpha_{i+1} / (2 alpha_{i+1} - alpha_i)`.
pub fn alpha_chain(n: usize, alpha: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Domain("manifold order must be at least 1"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain("alpha must lie in (0, 1)"));
    }
    // out[i] holds alpha_{i+1}; `next` trails one index above.
    let mut out = vec![0.0; n];
    out[n - 1] = alpha;
    let mut next = 1.0;
    for i in (1..n).rev() {
        let cur = out[i];
        let denominator = 2.0 * next - cur;
        if !(denominator > 0.0) {
            return Err(Error::InvalidAlpha {
                index: i,
                denominator,
            });
        }
        out[i - 1] = cur * next / denominator;
        next = cur;
    }
    Ok(out)
}

/// Monic polynomial, coefficients stored highest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coefficients: Vec<f64>,
}

impl Polynomial {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() < 2 {
            return Err(Error::Domain("polynomial degree must be at least 1"));
        }
        if coefficients[0] != 1.0 {
            return Err(Error::NonMonic(coefficients[0]));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("polynomial coefficients must be finite"));
        }
        Ok(Self { coefficients })
    }

    /// Characteristic polynomial `p^n + C_n p^{n-1} + ... + C_1` of the
    /// manifold gains given in the order `C_1, ..., C_n`.
    pub fn from_manifold_gains(gains: &[f64]) -> Result<Self> {
        let mut coefficients = Vec::with_capacity(gains.len() + 1);
        coefficients.push(1.0);
        coefficients.extend(gains.iter().rev());
        Self::new(coefficients)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }
}

/// Routh-Hurwitz test: `true` iff every root has a strictly negative real
/// part. A zero pivot anywhere in the first column means marginal or unstable
/// roots and yields `false`.
pub fn is_hurwitz(p: &Polynomial) -> bool {
    let a = p.coefficients();
    if a.iter().any(|&c| !(c > 0.0)) {
        return false;
    }
    let n = p.degree();
    let width = n / 2 + 1;
    let mut prev: Vec<f64> = (0..width).map(|j| a.get(2 * j).copied().unwrap_or(0.0)).collect();
    let mut cur: Vec<f64> = (0..width)
        .map(|j| a.get(2 * j + 1).copied().unwrap_or(0.0))
        .collect();
    for _ in 1..n {
        let pivot = cur[0];
        if !(pivot > 0.0) {
            return false;
        }
        let mut next = vec![0.0; width];
        for j in 0..width - 1 {
            next[j] = (pivot * prev[j + 1] - prev[0] * cur[j + 1]) / pivot;
        }
        prev = cur;
        cur = next;
    }
    cur[0] > 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Rk4,
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub step_size: f64,
    pub method: Method,
}

impl IntegratorConfig {
    pub fn new(step_size: f64, method: Method) -> Result<Self> {
        if !(step_size > 0.0 && step_size.is_finite()) {
            return Err(Error::Domain("step size must be positive"));
        }
        Ok(Self { step_size, method })
    }
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            step_size: 0.001,
            method: Method::Rk4,
        }
    }
}

/// Fixed-step stepper with preallocated stage buffers.
///
/// The vector field is evaluated at the stage times and stage states, so any
/// discontinuous term inside it is re-evaluated at every stage.
#[derive(Debug, Clone)]
pub struct Stepper {
    cfg: IntegratorConfig,
    k: [Vec<f64>; 4],
    stage: Vec<f64>,
}

impl Stepper {
    pub fn new(dim: usize, cfg: IntegratorConfig) -> Self {
        Self {
            cfg,
            k: [vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]],
            stage: vec![0.0; dim],
        }
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    /// Advances `x` in place from `t` to `t + h`.
    pub fn try_step<F>(&mut self, mut f: F, t: f64, x: &mut [f64]) -> Result<()>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        let dim = self.stage.len();
        if x.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: x.len(),
            });
        }
        let h = self.cfg.step_size;
        let [k1, k2, k3, k4] = &mut self.k;
        let stage = &mut self.stage;
        match self.cfg.method {
            Method::Euler => {
                f(t, x, k1)?;
                check_finite(k1, t)?;
                for (xi, ki) in x.iter_mut().zip(k1.iter()) {
                    *xi += h * ki;
                }
            }
            Method::Rk4 => {
                let half = 0.5 * h;
                f(t, x, k1)?;
                check_finite(k1, t)?;
                for i in 0..dim {
                    stage[i] = x[i] + half * k1[i];
                }
                f(t + half, stage, k2)?;
                check_finite(k2, t)?;
                for i in 0..dim {
                    stage[i] = x[i] + half * k2[i];
                }
                f(t + half, stage, k3)?;
                check_finite(k3, t)?;
                for i in 0..dim {
                    stage[i] = x[i] + h * k3[i];
                }
                f(t + h, stage, k4)?;
                check_finite(k4, t)?;
                let sixth = h / 6.0;
                for i in 0..dim {
                    x[i] += sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
        check_finite(x, t)
    }
}

fn check_finite(v: &[f64], t: f64) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericBlowup { time: t })
    }
}

/// One integrator step of `x' = f(t, x)` returning the new state.
pub fn integrate_step<F>(mut f: F, t: f64, x: &[f64], cfg: &IntegratorConfig) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut out = x.to_vec();
    check_finite(&out, t)?;
    Stepper::new(x.len(), *cfg).try_step(
        |t, x, dx| {
            f(t, x, dx);
            Ok(())
        },
        t,
        &mut out,
    )?;
    Ok(out)
}
