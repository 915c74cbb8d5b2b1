//! TOML scenario files, schema `itsmc-scenario/1`.
//!
//! ```toml
//! schema = "itsmc-scenario/1"
//! name = "example1"
//! horizon = 10.0
//!
//! [integrator]
//! step = 0.001
//! method = "rk4"
//!
//! [plant]
//! kind = "chain"
//! order = 3
//! x0 = [1.0, -1.0, 0.5]
//!
//! [disturbance]
//! kind = "sine"
//! amplitude = 1.0
//! omega = 6.283185307179586
//!
//! [manifold]
//! gains = [80.0, 66.0, 15.0]
//! alpha = 0.7
//!
//! [controller]
//! kind = "foitsmc_stc"
//! k1 = 3.96
//! k2 = 7.7
//! ```

use std::path::Path;

use itsmc_core::astw::AstwParams;
use itsmc_core::controllers::{AdoGains, DisGains, StcState};
use itsmc_core::linalg::{diag, scaled_identity, Mat3, Vec3};
use itsmc_core::manifold::ManifoldSpec;
use itsmc_core::numerics::{IntegratorConfig, Method};
use itsmc_core::observer::AdoParams;
use itsmc_core::plants::{ChainPlant, DisturbanceSignal, Handle};
use itsmc_core::scenario::{ChainController, ChainSetup, MetricsConfig, Scenario, SpacecraftSetup, System};
use itsmc_core::spacecraft::{Quaternion, RigidBody, ScGains};
use serde::Deserialize;

use crate::SimError;

pub const SCHEMA: &str = "itsmc-scenario/1";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct File {
    schema: String,
    name: String,
    horizon: f64,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    integrator: IntegratorSpec,
    plant: PlantSpec,
    #[serde(default)]
    disturbance: Option<DisturbanceSpec>,
    #[serde(default)]
    manifold: Option<ManifoldFile>,
    controller: ControllerSpec,
    #[serde(default)]
    metrics: MetricsSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegratorSpec {
    step: f64,
    #[serde(default)]
    method: MethodSpec,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self {
            step: 0.001,
            method: MethodSpec::Rk4,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
enum MethodSpec {
    #[default]
    Rk4,
    Euler,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum PlantSpec {
    Chain {
        order: usize,
        x0: Vec<f64>,
        #[serde(default)]
        f_n: Option<HandleSpec>,
        #[serde(default)]
        f_delta: Option<HandleSpec>,
        #[serde(default)]
        f_max: f64,
        #[serde(default)]
        b: Option<HandleSpec>,
        #[serde(default)]
        d_max: Option<f64>,
        #[serde(default)]
        z_offset: f64,
    },
    Spacecraft {
        #[serde(default)]
        inertia: Option<Mat3>,
        #[serde(default)]
        qv0: Option<Vec3>,
        #[serde(default)]
        omega0: Option<Vec3>,
        #[serde(default = "yes")]
        renormalize: bool,
    },
}

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum HandleSpec {
    Zero,
    Constant { value: f64 },
    Linear { coeffs: Vec<f64>, #[serde(default)] offset: f64 },
    Sine { amplitude: f64, omega: f64, #[serde(default)] phase: f64 },
}

impl From<HandleSpec> for Handle {
    fn from(h: HandleSpec) -> Self {
        match h {
            HandleSpec::Zero => Handle::Zero,
            HandleSpec::Constant { value } => Handle::Constant(value),
            HandleSpec::Linear { coeffs, offset } => Handle::Linear { coeffs, offset },
            HandleSpec::Sine { amplitude, omega, phase } => Handle::Sine { amplitude, omega, phase },
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum DisturbanceSpec {
    One(SignalSpec),
    Axes(Vec<SignalSpec>),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SignalSpec {
    Sine {
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    SinePlusRamp { amplitude: f64, omega: f64, slope: f64 },
    Constant { value: f64 },
}

impl From<SignalSpec> for DisturbanceSignal {
    fn from(s: SignalSpec) -> Self {
        match s {
            SignalSpec::Sine { amplitude, omega, phase } => DisturbanceSignal::Sine { amplitude, omega, phase },
            SignalSpec::SinePlusRamp { amplitude, omega, slope } => {
                DisturbanceSignal::SinePlusRamp { amplitude, omega, slope }
            }
            SignalSpec::Constant { value } => DisturbanceSignal::Constant(value),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifoldFile {
    gains: Vec<f64>,
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    alphas: Option<Vec<f64>>,
}

/// Scalar multiple of the identity, a diagonal, or a full matrix.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum MatSpec {
    Scalar(f64),
    Diag(Vec3),
    Full(Mat3),
}

impl MatSpec {
    fn matrix(self) -> Mat3 {
        match self {
            MatSpec::Scalar(c) => scaled_identity(c),
            MatSpec::Diag(d) => diag(d),
            MatSpec::Full(m) => m,
        }
    }

    fn diagonal(self) -> Result<Vec3, SimError> {
        match self {
            MatSpec::Scalar(c) => Ok([c; 3]),
            MatSpec::Diag(d) => Ok(d),
            MatSpec::Full(_) => Err(SimError::Schema("tau must be a scalar or a diagonal".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum VecSpec {
    Scalar(f64),
    Vector(Vec3),
}

impl VecSpec {
    fn vector(self) -> Vec3 {
        match self {
            VecSpec::Scalar(c) => [c; 3],
            VecSpec::Vector(v) => v,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ControllerSpec {
    FoitsmcDis {
        eta: f64,
        d_max: f64,
        #[serde(default)]
        f_max: f64,
        #[serde(default = "yes")]
        sample_hold: bool,
    },
    FoitsmcStc {
        #[serde(default)]
        k1: Option<f64>,
        #[serde(default)]
        k2: Option<f64>,
        #[serde(default)]
        rho: Option<f64>,
    },
    FoitsmcAdo(AdoSpec),
    FoitsmcFastAdo(AdoSpec),
    Astw {
        #[serde(default)]
        omega1: Option<f64>,
        #[serde(default)]
        gamma1: Option<f64>,
        #[serde(default)]
        eta: Option<f64>,
        #[serde(default)]
        epsilon: Option<f64>,
        #[serde(default)]
        mu: Option<f64>,
        #[serde(default)]
        alpha_m: Option<f64>,
        #[serde(default = "one")]
        alpha0: f64,
    },
}

fn one() -> f64 {
    1.0
}

/// Observer-based law. Scalars for the chain; scalars, diagonals or full
/// matrices for the spacecraft.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AdoSpec {
    #[serde(default)]
    kappa: Option<f64>,
    #[serde(default)]
    kappa2: f64,
    #[serde(default)]
    kv: Option<f64>,
    #[serde(default)]
    theta: Option<MatSpec>,
    lambda: MatSpec,
    tau: MatSpec,
    mu: MatSpec,
    #[serde(default = "default_delay")]
    delay: f64,
    #[serde(default)]
    k_hat0: Option<VecSpec>,
}

fn default_delay() -> f64 {
    0.001
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricsSpec {
    #[serde(default)]
    epsilon: Option<f64>,
    #[serde(default)]
    theta: Option<f64>,
}

fn scalar(m: MatSpec, what: &str) -> Result<f64, SimError> {
    match m {
        MatSpec::Scalar(c) => Ok(c),
        _ => Err(SimError::Schema(format!("{what} must be a scalar for a chain plant"))),
    }
}

fn schema_err(msg: &str) -> SimError {
    SimError::Schema(msg.into())
}

pub fn parse(text: &str) -> Result<Scenario, SimError> {
    let file: File = toml::from_str(text)?;
    if file.schema != SCHEMA {
        return Err(SimError::Schema(format!(
            "unsupported schema {:?}, expected {SCHEMA:?}",
            file.schema
        )));
    }
    let method = match file.integrator.method {
        MethodSpec::Rk4 => Method::Rk4,
        MethodSpec::Euler => Method::Euler,
    };
    let integrator = IntegratorConfig::new(file.integrator.step, method)?;
    let system = match file.plant {
        PlantSpec::Chain {
            order,
            x0,
            f_n,
            f_delta,
            f_max,
            b,
            d_max,
            z_offset,
        } => {
            let d0 = match file.disturbance {
                None => DisturbanceSignal::Constant(0.0),
                Some(DisturbanceSpec::One(s)) => s.into(),
                Some(DisturbanceSpec::Axes(_)) => return Err(schema_err("a chain plant takes one disturbance")),
            };
            let m = file.manifold.ok_or_else(|| schema_err("chain plant needs a [manifold] table"))?;
            let manifold = match (m.alpha, m.alphas) {
                (Some(a), None) => ManifoldSpec::from_exponent(m.gains, a)?,
                (None, Some(alphas)) => ManifoldSpec::new(m.gains, alphas)?,
                _ => return Err(schema_err("manifold needs exactly one of alpha or alphas")),
            };
            let plant = ChainPlant {
                order,
                f_n: f_n.map_or(Handle::Zero, Into::into),
                f_delta: f_delta.map_or(Handle::Zero, Into::into),
                f_max,
                b: b.map_or(Handle::Constant(1.0), Into::into),
                d0,
                d_max,
            };
            System::Chain(ChainSetup {
                plant,
                manifold,
                controller: chain_controller(file.controller)?,
                x0,
                z_offset,
            })
        }
        PlantSpec::Spacecraft {
            inertia,
            qv0,
            omega0,
            renormalize,
        } => {
            if file.manifold.is_some() {
                return Err(schema_err("a spacecraft plant has no [manifold] table"));
            }
            let mut sp = SpacecraftSetup::default();
            if let Some(j) = inertia {
                sp.body = RigidBody::new(j)?;
            }
            if let Some(qv) = qv0 {
                sp.attitude0 = Quaternion::from_vector_part(qv)?;
            }
            if let Some(w) = omega0 {
                sp.omega0 = w;
            }
            sp.renormalize = renormalize;
            match file.disturbance {
                None => sp.disturbance = [DisturbanceSignal::Constant(0.0); 3],
                Some(DisturbanceSpec::Axes(axes)) if axes.len() == 3 => {
                    sp.disturbance = [axes[0].into(), axes[1].into(), axes[2].into()];
                }
                Some(_) => return Err(schema_err("a spacecraft plant takes three [[disturbance]] entries")),
            }
            let ControllerSpec::FoitsmcAdo(a) = file.controller else {
                return Err(schema_err("the spacecraft supports the foitsmc_ado controller only"));
            };
            let theta = a.theta.ok_or_else(|| schema_err("spacecraft controller needs theta"))?;
            sp.gains = ScGains::new(
                a.kv.unwrap_or(1.0),
                theta.matrix(),
                a.lambda.matrix(),
                a.mu.matrix(),
                a.tau.diagonal()?,
            )?;
            sp.delay = a.delay;
            if let Some(k) = a.k_hat0 {
                sp.k_hat0 = k.vector();
            }
            System::Spacecraft(sp)
        }
    };
    let sc = Scenario {
        name: file.name,
        horizon: file.horizon,
        integrator,
        system,
        metrics: MetricsConfig {
            epsilon: file.metrics.epsilon,
            theta: file.metrics.theta,
        },
        seed: file.seed,
    };
    sc.validate()?;
    Ok(sc)
}

fn chain_controller(spec: ControllerSpec) -> Result<ChainController, SimError> {
    Ok(match spec {
        ControllerSpec::FoitsmcDis {
            eta,
            d_max,
            f_max,
            sample_hold,
        } => ChainController::Dis {
            gains: DisGains::new(eta, d_max, f_max)?,
            sample_hold,
        },
        ControllerSpec::FoitsmcStc { k1, k2, rho } => {
            let st = match (k1, k2, rho) {
                (Some(k1), Some(k2), None) => StcState::new(k1, k2)?,
                (None, None, Some(rho)) => StcState::from_rho(rho)?,
                _ => return Err(schema_err("super-twisting needs k1 and k2, or rho")),
            };
            ChainController::Stc { k1: st.k1, k2: st.k2 }
        }
        ControllerSpec::FoitsmcAdo(a) => ado(a, false)?,
        ControllerSpec::FoitsmcFastAdo(a) => ado(a, true)?,
        ControllerSpec::Astw {
            omega1,
            gamma1,
            eta,
            epsilon,
            mu,
            alpha_m,
            alpha0,
        } => {
            let d = AstwParams::default();
            let params = AstwParams::new(
                omega1.unwrap_or(d.omega1),
                gamma1.unwrap_or(d.gamma1),
                eta.unwrap_or(d.eta),
                epsilon.unwrap_or(d.epsilon),
                mu.unwrap_or(d.mu),
                alpha_m.unwrap_or(d.alpha_m),
            )?;
            ChainController::Astw { params, alpha0 }
        }
    })
}

fn ado(a: AdoSpec, fast: bool) -> Result<ChainController, SimError> {
    if a.theta.is_some() || a.kv.is_some() {
        return Err(schema_err("theta and kv apply to the spacecraft only"));
    }
    if fast != (a.kappa2 > 0.0) {
        return Err(schema_err("foitsmc_fast_ado needs kappa2 > 0 and foitsmc_ado needs kappa2 = 0"));
    }
    let kappa = a.kappa.ok_or_else(|| schema_err("observer-based law needs kappa"))?;
    let k_hat0 = match a.k_hat0 {
        None => 1.0,
        Some(VecSpec::Scalar(k)) => k,
        Some(VecSpec::Vector(_)) => return Err(schema_err("k_hat0 must be a scalar for a chain plant")),
    };
    Ok(ChainController::Ado {
        gains: AdoGains::new(kappa, a.kappa2)?,
        params: AdoParams::new(
            scalar(a.lambda, "lambda")?,
            scalar(a.tau, "tau")?,
            scalar(a.mu, "mu")?,
            a.delay,
        )?,
        k_hat0,
    })
}

pub fn load(path: &Path) -> Result<Scenario, SimError> {
    let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    parse(&text)
}
