//! Full-order integral-terminal sliding manifold.
//!
//! ```text
//! s  = x_n - z
//! z' = -C_n sig(x_n)^{a_n} - ... - C_1 sig(x_1)^{a_1},   z(0) = x_n(0)
//! ```
//!
//! The initialisation `z(0) = x_n(0)` puts the state on `s = 0` at `t = 0`,
//! so there is no reaching phase.

use alloc::vec::Vec;

use crate::numerics::{alpha_chain, is_hurwitz, spow, Polynomial};
use crate::{Error, Result};

/// Manifold gains `C_1..C_n` and exponents `alpha_1..alpha_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldSpec {
    gains: Vec<f64>,
    alphas: Vec<f64>,
}

/// Integrator state of the manifold and the sliding value it induces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldState {
    pub z: f64,
    pub s: f64,
}

impl ManifoldSpec {
    /// Validates eagerly: positive Hurwitz gains and exponents consistent with
    /// [`alpha_chain`] seeded by the last exponent.
    pub fn new(gains: Vec<f64>, alphas: Vec<f64>) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::Domain("manifold order must be at least 1"));
        }
        if gains.len() != alphas.len() {
            return Err(Error::Dimension {
                expected: gains.len(),
                got: alphas.len(),
            });
        }
        if gains.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return Err(Error::InvalidGains("manifold gains must be positive"));
        }
        if !is_hurwitz(&Polynomial::from_manifold_gains(&gains)?) {
            return Err(Error::NotHurwitz);
        }
        let chain = alpha_chain(gains.len(), alphas[alphas.len() - 1])?;
        if chain.iter().zip(&alphas).any(|(a, b)| (a - b).abs() > 1e-12) {
            return Err(Error::Domain("exponents do not follow the alpha recursion"));
        }
        Ok(Self { gains, alphas })
    }

    /// Builds the exponents from `alpha_n` through the recursion.
    pub fn from_exponent(gains: Vec<f64>, alpha: f64) -> Result<Self> {
        let alphas = alpha_chain(gains.len().max(1), alpha)?;
        Self::new(gains, alphas)
    }

    pub fn order(&self) -> usize {
        self.gains.len()
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.order() {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: self.order(),
                got: x.len(),
            })
        }
    }

    pub fn init(&self, x0: &[f64]) -> Result<ManifoldState> {
        self.check_dim(x0)?;
        let z = x0[self.order() - 1];
        Ok(ManifoldState { z, s: x0[self.order() - 1] - z })
    }

    /// `z' = -sum_i C_i sig(x_i)^{alpha_i}`.
    pub fn z_rate(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.z_rate_unchecked(x))
    }

    #[inline]
    pub(crate) fn z_rate_unchecked(&self, x: &[f64]) -> f64 {
        -self
            .gains
            .iter()
            .zip(&self.alphas)
            .zip(x)
            .map(|((c, a), xi)| c * spow(*xi, *a))
            .sum::<f64>()
    }

    pub fn sliding_value(&self, x: &[f64], st: &ManifoldState) -> Result<f64> {
        self.check_dim(x)?;
        Ok(x[self.order() - 1] - st.z)
    }

    /// Vector field of the ideal sliding motion (`s = 0` for all time).
    pub fn reduced_dynamics(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut out = Vec::with_capacity(x.len());
        out.extend_from_slice(&x[1..]);
        out.push(self.z_rate_unchecked(x));
        Ok(out)
    }
}

impl Default for ManifoldSpec {
    /// The third-order surface with `C = (80, 66, 15)` and exponents
    /// `(7/16, 7/13, 7/10)`.
    fn default() -> Self {
        Self::from_exponent(alloc::vec![80.0, 66.0, 15.0], 0.7).expect("default manifold is valid")
    }
}
