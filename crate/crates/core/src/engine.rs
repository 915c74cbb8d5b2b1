//! Augmented-state simulation loop.
//!
//! Each run integrates plant, manifold integrator, controller internals and
//! observer internals as one ODE with a fixed-step [`Stepper`]. The delayed
//! sign of the observer error and the sample-and-hold control are refreshed
//! once per step and held across the integrator stages.

use alloc::collections::VecDeque;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};

use crate::astw::AstwState;
use crate::controllers::EqvGains;
use crate::linalg::{add, dot, mat_vec, sub, Vec3};
use crate::numerics::{sgn, spow, Stepper};
use crate::observer::AdoState;
use crate::plants::StateFn;
use crate::scenario::{steps, ChainController, ChainSetup, Scenario, SpacecraftSetup, System};
use crate::spacecraft::{
    attitude_rhs, sc_control, sc_integrand, sc_k_rate, sc_observer_rhs, sc_sliding, sign_vec, Quaternion,
};
use crate::{Error, Result};

/// Sampled trajectory on the uniform grid `t_k = k h`, `k = 0..=floor(T/h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub step: f64,
    pub horizon: f64,
    pub columns: Vec<(String, Vec<f64>)>,
    /// Largest `|q0^2 + |qv|^2 - 1|` seen before each renormalisation.
    pub quaternion_drift: Option<f64>,
}

impl Trajectory {
    pub fn new(step: f64, horizon: f64, names: &[String]) -> Self {
        Self {
            step,
            horizon,
            columns: names.iter().map(|n| (n.clone(), Vec::new())).collect(),
            quaternion_drift: None,
        }
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, |(_, v)| v.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time(&self) -> &[f64] {
        self.column("t").unwrap_or(&[])
    }

    /// Columns `prefix1, prefix2, ...` if present, else the single column
    /// `prefix`.
    pub fn group(&self, prefix: &str) -> Vec<&[f64]> {
        let indexed: Vec<&[f64]> = (1..)
            .map_while(|i| self.column(&format!("{prefix}{i}")))
            .collect();
        if indexed.is_empty() {
            self.column(prefix).into_iter().collect()
        } else {
            indexed
        }
    }

    /// Euclidean norm across a column group at every sample.
    pub fn group_norm(&self, prefix: &str) -> Vec<f64> {
        let cols = self.group(prefix);
        (0..self.len())
            .map(|k| libm::sqrt(cols.iter().map(|c| c[k] * c[k]).sum::<f64>()))
            .collect()
    }

    fn push_row(&mut self, row: &[f64], t: f64) -> Result<()> {
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericBlowup { time: t });
        }
        for ((_, col), v) in self.columns.iter_mut().zip(row) {
            col.push(*v);
        }
        Ok(())
    }
}

/// Runs a validated scenario.
pub fn run(sc: &Scenario) -> Result<Trajectory> {
    sc.validate()?;
    let n_steps = steps(sc.horizon, sc.integrator.step_size);
    match &sc.system {
        System::Chain(c) => run_chain(sc, c, n_steps),
        System::Spacecraft(s) => run_spacecraft(sc, s, n_steps),
    }
}

/// Column names of the chain trajectory.
pub fn chain_columns(order: usize) -> Vec<String> {
    let mut names = vec!["t".to_string()];
    names.extend((1..=order).map(|i| format!("x{i}")));
    names.extend(["s", "u", "d", "d_hat", "d_tilde", "k_hat", "V"].map(String::from));
    names
}

/// Column names of the spacecraft trajectory.
pub fn spacecraft_columns() -> Vec<String> {
    let mut names = vec!["t".to_string()];
    names.extend((0..4).map(|i| format!("q{i}")));
    for prefix in ["Omega", "s", "u", "d", "d_hat", "d_tilde", "k_hat"] {
        names.extend((1..=3).map(|i| format!("{prefix}{i}")));
    }
    names.push("V".into());
    names
}

/// Per-step discrete inputs to the vector field.
#[derive(Clone, Copy, Default)]
struct Held {
    sign: i8,
    u: Option<f64>,
}

struct ChainOut {
    s: f64,
    u: f64,
    d_hat: f64,
    gain: f64,
}

struct ChainCtx<'a> {
    c: &'a ChainSetup,
    n: usize,
}

impl ChainCtx<'_> {
    /// Writes the augmented derivative into `dy` and returns the outputs.
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64], held: Held) -> Result<ChainOut> {
        let (c, n) = (self.c, self.n);
        let x = &y[..n];
        let s = x[n - 1] - y[n];
        let eqv = EqvGains::new(&c.manifold, &c.plant.f_n, &c.plant.b);
        let (u, d_hat, gain) = match &c.controller {
            ChainController::Dis { gains, .. } => {
                let u = match held.u {
                    Some(u) => u,
                    None => eqv.total_control(gains.u_dis(s), x, t)?,
                };
                (u, 0.0, 0.0)
            }
            ChainController::Stc { k1, k2 } => {
                let v = y[n + 1];
                dy[n + 1] = -k2 * sgn(s);
                (eqv.total_control(-k1 * spow(s, 0.5) + v, x, t)?, 0.0, 0.0)
            }
            ChainController::Ado { gains, params, .. } => {
                let st = AdoState {
                    zeta: y[n + 1],
                    k_hat: y[n + 2],
                    omega_prev: None,
                    omega: 0.0,
                };
                let d_hat = params.d_hat(x[n - 1], st.zeta);
                let u = eqv.total_control(gains.u_ado(s, d_hat), x, t)?;
                dy[n + 1] = params.zeta_rate(&eqv, x, t, u, &st, held.sign, s);
                dy[n + 2] = params.k_hat_rate(st.k_hat, s);
                dy[n + 3] = c.plant.f_n.eval(x, t) + c.plant.b.eval(x, t) * u + d_hat;
                (u, d_hat, st.k_hat)
            }
            ChainController::Astw { params, .. } => {
                let st = AstwState {
                    alpha: y[n + 1],
                    v: y[n + 2],
                    params: *params,
                };
                let (alpha_dot, v_dot) = st.rates(s);
                dy[n + 1] = alpha_dot;
                dy[n + 2] = v_dot;
                (eqv.total_control(st.output(s), x, t)?, 0.0, st.alpha)
            }
        };
        c.plant.rhs_into(x, t, u, &mut dy[..n])?;
        dy[n] = c.manifold.z_rate_unchecked(x);
        Ok(ChainOut { s, u, d_hat, gain })
    }
}

/// Delay line for `omega`, returning `omega(t - tau_d)` once available.
struct DelayLine<T> {
    buf: VecDeque<T>,
    len: usize,
}

impl<T: Copy> DelayLine<T> {
    fn new(delay: f64, h: f64) -> Self {
        let len = (libm::round(delay / h) as usize).max(1);
        Self {
            buf: VecDeque::with_capacity(len + 1),
            len,
        }
    }

    fn push(&mut self, v: T) -> Option<T> {
        let prev = if self.buf.len() == self.len { self.buf.front().copied() } else { None };
        self.buf.push_back(v);
        if self.buf.len() > self.len {
            self.buf.pop_front();
        }
        prev
    }
}

fn run_chain(sc: &Scenario, c: &ChainSetup, n_steps: usize) -> Result<Trajectory> {
    let n = c.plant.order;
    let h = sc.integrator.step_size;
    let dim = n + 1 + c.controller.internal_dim();
    let mut y = vec![0.0; dim];
    y[..n].copy_from_slice(&c.x0);
    y[n] = c.x0[n - 1] + c.z_offset;
    let mut k_true = 0.0;
    let mut delay = None;
    match &c.controller {
        ChainController::Dis { .. } | ChainController::Stc { .. } => {}
        ChainController::Ado { params, k_hat0, .. } => {
            y[n + 1] = c.x0[n - 1];
            y[n + 2] = *k_hat0;
            k_true = c.plant.d0.rate_bound()?;
            delay = Some(DelayLine::new(params.delay, h));
        }
        ChainController::Astw { params, alpha0 } => y[n + 1] = alpha0.max(params.alpha_m),
    }
    let sample_hold = matches!(c.controller, ChainController::Dis { sample_hold: true, .. });
    let alpha_floor = match &c.controller {
        ChainController::Astw { params, .. } => Some(params.alpha_m),
        _ => None,
    };

    let ctx = ChainCtx { c, n };
    let mut tr = Trajectory::new(h, sc.horizon, &chain_columns(n));
    let mut stepper = Stepper::new(dim, sc.integrator);
    let mut scratch = vec![0.0; dim];
    let mut row = vec![0.0; n + 8];
    for k in 0..=n_steps {
        let t = k as f64 * h;
        c.plant.check_assumptions(&y[..n], t)?;
        let mut held = Held::default();
        if let Some(line) = delay.as_mut() {
            let omega = y[n - 1] - y[n + 3];
            held.sign = line.push(omega).map_or(0, |prev| crate::numerics::sgn_i8(omega - prev));
        }
        let out = ctx.eval(t, &y, &mut scratch, held)?;
        if sample_hold {
            held.u = Some(out.u);
        }

        let d = c.plant.lumped_disturbance(&y[..n], t);
        let d_tilde = d - out.d_hat;
        let v = match c.controller {
            ChainController::Ado { .. } => {
                let k_tilde = k_true - out.gain;
                0.5 * (out.s * out.s + d_tilde * d_tilde + k_tilde * k_tilde)
            }
            _ => 0.5 * out.s * out.s,
        };
        row[0] = t;
        row[1..=n].copy_from_slice(&y[..n]);
        row[n + 1..].copy_from_slice(&[out.s, out.u, d, out.d_hat, d_tilde, out.gain, v]);
        tr.push_row(&row, t)?;

        if k == n_steps {
            break;
        }
        stepper.try_step(|t, y, dy| ctx.eval(t, y, dy, held).map(|_| ()), t, &mut y)?;
        if let Some(floor) = alpha_floor {
            y[n + 1] = y[n + 1].max(floor);
        }
    }
    Ok(tr)
}

// Augmented spacecraft state layout.
const Q: usize = 0;
const W: usize = 4;
const INT: usize = 7;
const Z: usize = 10;
const K: usize = 13;
const I: usize = 16;
const SC_DIM: usize = 19;

fn v3(y: &[f64], at: usize) -> Vec3 {
    [y[at], y[at + 1], y[at + 2]]
}

fn put3(y: &mut [f64], at: usize, v: Vec3) {
    y[at..at + 3].copy_from_slice(&v);
}

struct ScOut {
    s: Vec3,
    u: Vec3,
    d: Vec3,
    d_hat: Vec3,
    k_hat: Vec3,
}

fn sc_eval(sp: &SpacecraftSetup, t: f64, y: &[f64], dy: &mut [f64], sign: [i8; 3]) -> ScOut {
    let g = &sp.gains;
    let q = Quaternion::new(y[Q], v3(y, Q + 1));
    let omega = v3(y, W);
    let k_hat = v3(y, K);
    let (s, e) = sc_sliding(g, &q, omega, v3(y, INT));
    let u = sc_control(g, &sp.body, &q, omega, s, e);
    let (d_hat, z_dot) = sc_observer_rhs(g, &sp.body, omega, v3(y, Z), u, k_hat, sign, s);
    let d = sp.disturbance_at(t);
    let r = attitude_rhs(&sp.body, &q, omega, u, d);
    dy[Q] = r.q0_dot;
    put3(dy, Q + 1, r.qv_dot);
    put3(dy, W, r.omega_dot);
    put3(dy, INT, sc_integrand(e));
    put3(dy, Z, z_dot);
    put3(dy, K, sc_k_rate(g, k_hat, s));
    put3(dy, I, add(sub(u, sp.body.gyroscopic(omega)), d_hat));
    ScOut { s, u, d, d_hat, k_hat }
}

fn run_spacecraft(sc: &Scenario, sp0: &SpacecraftSetup, n_steps: usize) -> Result<Trajectory> {
    let h = sc.integrator.step_size;
    let k_true = sp0.k_true()?;
    let mut sp = sp0.clone();
    let q0 = sp.attitude0;
    sp.gains.e0 = add(sp.omega0, crate::linalg::scale(sp.gains.kv, q0.qv));

    let mut y = vec![0.0; SC_DIM];
    y[Q] = q0.q0;
    put3(&mut y, Q + 1, q0.qv);
    put3(&mut y, W, sp.omega0);
    put3(&mut y, Z, sp.omega0);
    put3(&mut y, K, sp.k_hat0);

    let mut delay = DelayLine::new(sp.delay, h);
    let mut tr = Trajectory::new(h, sc.horizon, &spacecraft_columns());
    let mut stepper = Stepper::new(SC_DIM, sc.integrator);
    let mut scratch = vec![0.0; SC_DIM];
    let mut drift: f64 = 0.0;
    let mut row = Vec::with_capacity(30);
    for k in 0..=n_steps {
        let t = k as f64 * h;
        let omega_obs = sub(mat_vec(sp.body.inertia(), v3(&y, W)), v3(&y, I));
        let sign = sign_vec(omega_obs, delay.push(omega_obs));
        let out = sc_eval(&sp, t, &y, &mut scratch, sign);

        let d_tilde = sub(out.d, out.d_hat);
        let k_tilde = sub(k_true, out.k_hat);
        let v = 0.5 * (dot(out.s, out.s) + dot(d_tilde, d_tilde) + dot(k_tilde, k_tilde));
        row.clear();
        row.push(t);
        row.extend_from_slice(&y[Q..Q + 4]);
        for block in [v3(&y, W), out.s, out.u, out.d, out.d_hat, d_tilde, out.k_hat] {
            row.extend_from_slice(&block);
        }
        row.push(v);
        tr.push_row(&row, t)?;

        if k == n_steps {
            break;
        }
        stepper.try_step(
            |t, y, dy| {
                sc_eval(&sp, t, y, dy, sign);
                Ok(())
            },
            t,
            &mut y,
        )?;
        let q = Quaternion::new(y[Q], v3(&y, Q + 1));
        drift = drift.max(q.norm_error());
        if sp.renormalize {
            let qn = q.normalized();
            y[Q] = qn.q0;
            put3(&mut y, Q + 1, qn.qv);
        }
    }
    tr.quaternion_drift = Some(drift);
    Ok(tr)
}
