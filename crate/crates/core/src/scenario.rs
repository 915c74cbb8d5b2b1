//! In-memory scenario description. Parsing from files lives in the companion
//! crate; everything here is validated before a run starts.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::astw::AstwParams;
use crate::controllers::{AdoGains, DisGains, StcState};
use crate::manifold::ManifoldSpec;
use crate::numerics::IntegratorConfig;
use crate::observer::AdoParams;
use crate::plants::{ChainPlant, DisturbanceSignal};
use crate::spacecraft::{Quaternion, RigidBody, ScGains};
use crate::linalg::Vec3;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ChainController {
    /// Discontinuous switching law. With `sample_hold` the control is computed
    /// once per step and held across the integrator stages, as a digital
    /// implementation would.
    Dis { gains: DisGains, sample_hold: bool },
    Stc { k1: f64, k2: f64 },
    /// Observer-based law; `gains.kappa2 > 0` selects the fast variant.
    Ado {
        gains: AdoGains,
        params: AdoParams,
        k_hat0: f64,
    },
    Astw { params: AstwParams, alpha0: f64 },
}

impl ChainController {
    pub fn kind(&self) -> &'static str {
        match self {
            ChainController::Dis { .. } => "foitsmc_dis",
            ChainController::Stc { .. } => "foitsmc_stc",
            ChainController::Ado { gains, .. } if gains.kappa2 > 0.0 => "foitsmc_fast_ado",
            ChainController::Ado { .. } => "foitsmc_ado",
            ChainController::Astw { .. } => "astw",
        }
    }

    /// Number of controller and observer states appended after `[x, z]`.
    pub fn internal_dim(&self) -> usize {
        match self {
            ChainController::Dis { .. } => 0,
            ChainController::Stc { .. } => 1,
            ChainController::Ado { .. } => 3,
            ChainController::Astw { .. } => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ChainController::Dis { gains, .. } => DisGains::new(gains.eta, gains.d_max, gains.f_max).map(|_| ()),
            ChainController::Stc { k1, k2 } => StcState::new(*k1, *k2).map(|_| ()),
            ChainController::Ado { gains, params, k_hat0 } => {
                AdoGains::new(gains.kappa, gains.kappa2)?;
                AdoParams::new(params.lambda, params.tau, params.mu, params.delay)?;
                gains.check_adaptation(params.mu)?;
                if !(*k_hat0 > 0.0) {
                    return Err(Error::InvalidGains("initial k_hat must be positive"));
                }
                Ok(())
            }
            ChainController::Astw { params, alpha0 } => {
                let p = params;
                AstwParams::new(p.omega1, p.gamma1, p.eta, p.epsilon, p.mu, p.alpha_m)?;
                if !(*alpha0 > 0.0) {
                    return Err(Error::InvalidGains("initial alpha must be positive"));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSetup {
    pub plant: ChainPlant,
    pub manifold: ManifoldSpec,
    pub controller: ChainController,
    pub x0: Vec<f64>,
    /// Offset added to `z(0)`, so that `s(0) = -z_offset`. Zero in normal use.
    pub z_offset: f64,
}

impl ChainSetup {
    pub fn validate(&self) -> Result<()> {
        self.plant.validate()?;
        let n = self.plant.order;
        if self.manifold.order() != n {
            return Err(Error::Dimension {
                expected: n,
                got: self.manifold.order(),
            });
        }
        if self.x0.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: self.x0.len(),
            });
        }
        if self.x0.iter().any(|v| !v.is_finite()) || !self.z_offset.is_finite() {
            return Err(Error::Domain("initial conditions must be finite"));
        }
        self.controller.validate()?;
        if matches!(self.controller, ChainController::Ado { .. }) {
            // The Lyapunov trace needs the true derivative bound.
            self.plant.d0.rate_bound()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacecraftSetup {
    pub body: RigidBody,
    /// `e0` is filled in from the initial state at run time.
    pub gains: ScGains,
    pub disturbance: [DisturbanceSignal; 3],
    pub attitude0: Quaternion,
    pub omega0: Vec3,
    pub k_hat0: Vec3,
    /// Delay of the componentwise sign reconstruction, in seconds.
    pub delay: f64,
    pub renormalize: bool,
}

impl SpacecraftSetup {
    /// `d(t) = (0.1 sin 0.5t, 0.2 sin 0.3t, 0.1 cos 0.4t)`.
    pub fn default_disturbance() -> [DisturbanceSignal; 3] {
        [
            DisturbanceSignal::Sine { amplitude: 0.1, omega: 0.5, phase: 0.0 },
            DisturbanceSignal::Sine { amplitude: 0.2, omega: 0.3, phase: 0.0 },
            DisturbanceSignal::Sine {
                amplitude: 0.1,
                omega: 0.4,
                phase: core::f64::consts::FRAC_PI_2,
            },
        ]
    }

    /// Componentwise derivative bounds of the disturbance.
    pub fn k_true(&self) -> Result<Vec3> {
        Ok([
            self.disturbance[0].rate_bound()?,
            self.disturbance[1].rate_bound()?,
            self.disturbance[2].rate_bound()?,
        ])
    }

    pub fn disturbance_at(&self, t: f64) -> Vec3 {
        [
            self.disturbance[0].value(t),
            self.disturbance[1].value(t),
            self.disturbance[2].value(t),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        self.gains.validate_with(&self.body)?;
        self.k_true()?;
        if !(self.attitude0.norm_error() <= 1e-9) {
            return Err(Error::Domain("initial attitude must be a unit quaternion"));
        }
        if self.k_hat0.iter().any(|&k| !(k > 0.0)) {
            return Err(Error::InvalidGains("initial k_hat must be positive"));
        }
        if !(self.delay > 0.0) {
            return Err(Error::InvalidGains("observer delay must be positive"));
        }
        if self.omega0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("initial rate must be finite"));
        }
        Ok(())
    }
}

impl Default for SpacecraftSetup {
    fn default() -> Self {
        Self {
            body: RigidBody::default(),
            gains: ScGains::default(),
            disturbance: Self::default_disturbance(),
            attitude0: Quaternion::from_vector_part([0.3, -0.2, 0.3]).expect("unit vector part"),
            omega0: [0.0; 3],
            k_hat0: [1.0; 3],
            delay: 0.001,
            renormalize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum System {
    Chain(ChainSetup),
    Spacecraft(SpacecraftSetup),
}

/// Metric settings carried with a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricsConfig {
    /// Real-sliding radius; auto-calibrated when absent.
    pub epsilon: Option<f64>,
    /// Split `theta` of the decay rate; `gamma / 2` when absent.
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub horizon: f64,
    pub integrator: IntegratorConfig,
    pub system: System,
    pub metrics: MetricsConfig,
    /// Recorded only; every built-in scenario is deterministic.
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Domain("horizon must be positive"));
        }
        IntegratorConfig::new(self.integrator.step_size, self.integrator.method)?;
        if self.integrator.step_size > self.horizon {
            return Err(Error::Domain("step size exceeds the horizon"));
        }
        if let Some(eps) = self.metrics.epsilon {
            if !(eps > 0.0) {
                return Err(Error::Domain("epsilon must be positive"));
            }
        }
        match &self.system {
            System::Chain(c) => c.validate(),
            System::Spacecraft(sc) => sc.validate(),
        }
    }

    /// Number of samples `floor(T / h) + 1`.
    pub fn sample_count(&self) -> usize {
        steps(self.horizon, self.integrator.step_size) + 1
    }

    /// Same scenario with every disturbance replaced by zero.
    pub fn without_disturbance(&self) -> Scenario {
        let mut out = self.clone();
        match &mut out.system {
            System::Chain(c) => {
                c.plant.d0 = DisturbanceSignal::Constant(0.0);
                c.plant.f_delta = crate::plants::Handle::Zero;
            }
            System::Spacecraft(sc) => sc.disturbance = [DisturbanceSignal::Constant(0.0); 3],
        }
        out
    }

    pub fn controller_kind(&self) -> &'static str {
        match &self.system {
            System::Chain(c) => c.controller.kind(),
            System::Spacecraft(_) => "foitsmc_ado",
        }
    }
}

/// `floor(T / h)` with a relative guard against representation error, so
/// that `T = 20`, `h = 0.001` gives 20000.
pub(crate) fn steps(horizon: f64, h: f64) -> usize {
    let r = horizon / h;
    let n = libm::round(r);
    if (r - n).abs() <= 1e-9 * r.max(1.0) {
        n as usize
    } else {
        libm::floor(r) as usize
    }
}

/// The first example: third-order integrator chain under `sin(2 pi t)` with
/// the super-twisting law.
pub fn example1() -> Scenario {
    chain_scenario(
        "example1",
        10.0,
        DisturbanceSignal::unit_sine(),
        ChainController::Stc { k1: 3.96, k2: 7.7 },
    )
}

/// The second example: the same plant with the observer-based law.
pub fn example2() -> Scenario {
    chain_scenario(
        "example2",
        20.0,
        DisturbanceSignal::unit_sine(),
        ChainController::Ado {
            gains: AdoGains { kappa: 5.0, kappa2: 0.0 },
            params: AdoParams {
                lambda: 5.0,
                tau: 5.0,
                mu: 2.0,
                delay: 0.001,
            },
            k_hat0: 1.0,
        },
    )
}

pub fn chain_scenario(name: &str, horizon: f64, d0: DisturbanceSignal, controller: ChainController) -> Scenario {
    Scenario {
        name: name.into(),
        horizon,
        integrator: IntegratorConfig::default(),
        system: System::Chain(ChainSetup {
            plant: ChainPlant::integrator_chain(3, d0),
            manifold: ManifoldSpec::default(),
            controller,
            x0: vec![1.0, -1.0, 0.5],
            z_offset: 0.0,
        }),
        metrics: MetricsConfig::default(),
        seed: 0,
    }
}

pub fn spacecraft_default() -> Scenario {
    Scenario {
        name: "spacecraft".into(),
        horizon: 30.0,
        integrator: IntegratorConfig::default(),
        system: System::Spacecraft(SpacecraftSetup::default()),
        metrics: MetricsConfig::default(),
        seed: 0,
    }
}
