//! Trajectory metrics: reaching times, ultimate bounds, chattering and the
//! sampled Lyapunov decrease check.

use crate::engine::{run, Trajectory};
use crate::observer::{default_bounds, theoretical_bounds, Bounds};
use crate::scenario::{ChainController, Scenario, System};
use crate::spacecraft::{sc_bounds, sc_default_bounds};
use crate::{Error, Result};

/// Earliest sample time after which `|s| <= epsilon` holds for every later
/// sample, or `None` if the last sample is still outside.
pub fn detect_real_sliding(time: &[f64], s: &[f64], epsilon: f64) -> Option<f64> {
    match s.iter().rposition(|v| v.abs() > epsilon) {
        None => time.first().copied(),
        Some(k) => time.get(k + 1).copied(),
    }
}

/// Total variation of `u` divided by the horizon.
pub fn chattering_index(u: &[f64], horizon: f64) -> f64 {
    total_variation(u) / horizon
}

pub fn total_variation(u: &[f64]) -> f64 {
    u.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// `1e-3 max(1, V(0))`.
pub fn lyapunov_tolerance(v0: f64) -> f64 {
    1e-3 * v0.max(1.0)
}

/// Fraction of samples with `V > level` at which the forward difference of
/// `V` exceeds `-gamma V + delta_bar + tol`. Zero when no sample is outside.
pub fn lyapunov_check(v: &[f64], h: f64, gamma: f64, delta_bar: f64, level: f64, tol: f64) -> f64 {
    let (mut outside, mut bad) = (0usize, 0usize);
    for w in v.windows(2) {
        if w[0] > level {
            outside += 1;
            if (w[1] - w[0]) / h > -gamma * w[0] + delta_bar + tol {
                bad += 1;
            }
        }
    }
    if outside == 0 {
        0.0
    } else {
        bad as f64 / outside as f64
    }
}

/// Fraction of samples with `|s| > epsilon` at which `s (s_next - s) <= 0`,
/// or `None` if there are no such samples.
pub fn sliding_decrease_fraction(s: &[f64], epsilon: f64) -> Option<f64> {
    let (mut outside, mut good) = (0usize, 0usize);
    for w in s.windows(2) {
        if w[0].abs() > epsilon {
            outside += 1;
            if w[0] * (w[1] - w[0]) <= 0.0 {
                good += 1;
            }
        }
    }
    (outside > 0).then(|| good as f64 / outside as f64)
}

fn sup_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    /// `None` when the trajectory never settles.
    pub reaching_time_observed: Option<f64>,
    pub reaching_time_bound: Option<f64>,
    pub ultimate_bound_theoretical: Option<f64>,
    pub ultimate_bound_observed: f64,
    pub chattering_index: f64,
    pub lyapunov_violation_fraction: Option<f64>,
    pub real_sliding_epsilon: f64,
    pub sup_abs_s: f64,
    /// Supremum of `|s|` from the observed reaching time on.
    pub sup_abs_s_post_reaching: Option<f64>,
    pub sup_adaptive_gain: Option<f64>,
    pub final_state_norm: f64,
    pub quaternion_norm_drift: Option<f64>,
}

/// Bound constants for observer-based scenarios.
fn bounds_for(sc: &Scenario) -> Result<Option<Bounds>> {
    match &sc.system {
        System::Chain(c) => match &c.controller {
            ChainController::Ado { gains, params, .. } => {
                let k = c.plant.d0.rate_bound()?;
                Ok(Some(match sc.metrics.theta {
                    Some(theta) => theoretical_bounds(params, gains, k, theta)?,
                    None => default_bounds(params, gains, k)?,
                }))
            }
            _ => Ok(None),
        },
        System::Spacecraft(sp) => {
            let k = sp.k_true()?;
            let b = match sc.metrics.theta {
                Some(varrho) => sc_bounds(&sp.gains, &sp.body, k, varrho)?,
                None => sc_default_bounds(&sp.gains, &sp.body, k)?,
            };
            Ok(Some(Bounds::new(b.gamma, b.varrho, b.delta_bar)?))
        }
    }
}

/// Public view of the bound constants used by [`evaluate`].
pub fn scenario_bounds(sc: &Scenario) -> Result<Option<Bounds>> {
    bounds_for(sc)
}

/// Real-sliding radius: five times the sliding floor of the undisturbed run,
/// or five times the scenario's own `sup |s|` when that floor is exactly zero.
pub fn calibrate_epsilon(sc: &Scenario, tr: &Trajectory) -> Result<f64> {
    if let Some(eps) = sc.metrics.epsilon {
        return Ok(eps);
    }
    let quiet = run(&sc.without_disturbance())?;
    let floor = sup_abs(quiet.group_norm("s"));
    let base = if floor > 0.0 { floor } else { sup_abs(tr.group_norm("s")) };
    Ok(if base > 0.0 { 5.0 * base } else { f64::EPSILON })
}

fn check_shape(sc: &Scenario, tr: &Trajectory) -> Result<()> {
    if tr.len() != sc.sample_count() {
        return Err(Error::Dimension {
            expected: sc.sample_count(),
            got: tr.len(),
        });
    }
    if tr.len() < 2 {
        return Err(Error::Domain("trajectory needs at least two samples"));
    }
    for col in ["t", "u", "V"].into_iter().chain(["s", "d_tilde", "k_hat"]) {
        if tr.group(col).is_empty() {
            return Err(Error::Mismatch("trajectory is missing a required column"));
        }
    }
    Ok(())
}

pub fn evaluate(sc: &Scenario, tr: &Trajectory) -> Result<MetricsReport> {
    sc.validate()?;
    check_shape(sc, tr)?;
    let time = tr.time();
    let h = sc.integrator.step_size;
    let s_norm = tr.group_norm("s");
    let epsilon = calibrate_epsilon(sc, tr)?;
    let bounds = bounds_for(sc)?;

    let u_cols = tr.group("u");
    let chattering = u_cols.iter().map(|u| chattering_index(u, sc.horizon)).sum();

    let v = tr.column("V").expect("checked");
    let (reaching, bound_time, ultimate_theory, violations) = match &bounds {
        Some(b) => {
            let tol = lyapunov_tolerance(v[0]);
            (
                detect_real_sliding(time, v, b.level()),
                Some(b.reaching_time(v[0])?),
                Some(b.ultimate_bound),
                Some(lyapunov_check(v, h, b.gamma, b.delta_bar, b.level(), tol)),
            )
        }
        None => (detect_real_sliding(time, &s_norm, epsilon), None, None, None),
    };

    let from = reaching.map(|t| time.iter().position(|&x| x >= t).unwrap_or(time.len()));
    let sup_post = from.map(|k| sup_abs(s_norm[k..].iter().copied()));
    let ultimate_observed = match (&bounds, from) {
        (Some(_), Some(k)) => {
            let dt = tr.group_norm("d_tilde");
            sup_abs((k..tr.len()).map(|i| libm::sqrt(s_norm[i] * s_norm[i] + dt[i] * dt[i])))
        }
        (None, Some(_)) => sup_post.unwrap_or(0.0),
        (_, None) => sup_abs(s_norm.iter().copied()),
    };

    let adaptive = match &sc.system {
        System::Chain(c) => matches!(c.controller, ChainController::Ado { .. } | ChainController::Astw { .. }),
        System::Spacecraft(_) => true,
    };
    let sup_gain = adaptive.then(|| {
        tr.group("k_hat")
            .iter()
            .flat_map(|c| c.iter().copied())
            .fold(f64::MIN, f64::max)
    });

    let last = tr.len() - 1;
    let state_cols = match &sc.system {
        System::Chain(_) => tr.group("x"),
        System::Spacecraft(_) => {
            let mut cols: alloc::vec::Vec<&[f64]> = (1..4)
                .filter_map(|i| tr.column(&alloc::format!("q{i}")))
                .collect();
            cols.extend(tr.group("Omega"));
            cols
        }
    };
    let final_state_norm = libm::sqrt(state_cols.iter().map(|c| c[last] * c[last]).sum::<f64>());

    Ok(MetricsReport {
        reaching_time_observed: reaching,
        reaching_time_bound: bound_time,
        ultimate_bound_theoretical: ultimate_theory,
        ultimate_bound_observed: ultimate_observed,
        chattering_index: chattering,
        lyapunov_violation_fraction: violations,
        real_sliding_epsilon: epsilon,
        sup_abs_s: sup_abs(s_norm.iter().copied()),
        sup_abs_s_post_reaching: sup_post,
        sup_adaptive_gain: sup_gain,
        final_state_norm,
        quaternion_norm_drift: tr.quaternion_drift,
    })
}

/// Values of one metric for runs `a` and `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    pub a: f64,
    pub b: f64,
}

impl Pair {
    pub fn delta(&self) -> f64 {
        self.a - self.b
    }

    pub fn a_below_b(&self) -> bool {
        self.a < self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    /// Later of the two observed reaching times (the horizon if one never
    /// settles).
    pub common_reaching_time: f64,
    pub sup_adaptive_gain: Pair,
    pub sup_abs_s_post_reaching: Pair,
    /// `sup |s|` over the last quarter of the horizon.
    pub sup_abs_s_tail: Pair,
    pub chattering_index: Pair,
    pub a: MetricsReport,
    pub b: MetricsReport,
}

impl ComparisonReport {
    pub fn gain_verdict(&self) -> bool {
        self.sup_adaptive_gain.a_below_b()
    }

    pub fn sliding_verdict(&self) -> bool {
        self.sup_abs_s_post_reaching.a_below_b()
    }
}

fn check_comparable(a: &Scenario, b: &Scenario) -> Result<()> {
    let (System::Chain(ca), System::Chain(cb)) = (&a.system, &b.system) else {
        return Err(Error::Mismatch("comparison needs two chain scenarios"));
    };
    if ca.plant != cb.plant || ca.x0 != cb.x0 || ca.manifold != cb.manifold {
        return Err(Error::Mismatch("scenarios use different plants or initial states"));
    }
    if a.horizon != b.horizon || a.integrator != b.integrator {
        return Err(Error::Mismatch("scenarios use different horizons or integrators"));
    }
    Ok(())
}

pub fn compare(a: &Scenario, b: &Scenario) -> Result<ComparisonReport> {
    check_comparable(a, b)?;
    let ta = run(a)?;
    let tb = run(b)?;
    compare_runs(a, &ta, b, &tb)
}

/// [`compare`] on trajectories that were already computed.
pub fn compare_runs(a: &Scenario, ta: &Trajectory, b: &Scenario, tb: &Trajectory) -> Result<ComparisonReport> {
    check_comparable(a, b)?;
    let ma = evaluate(a, ta)?;
    let mb = evaluate(b, tb)?;
    let common = ma
        .reaching_time_observed
        .unwrap_or(a.horizon)
        .max(mb.reaching_time_observed.unwrap_or(b.horizon));
    let sup_from = |tr: &Trajectory, t0: f64| {
        let s = tr.group_norm("s");
        sup_abs(tr.time().iter().zip(s).filter(|(t, _)| **t >= t0).map(|(_, s)| s))
    };
    let tail = 0.75 * a.horizon;
    Ok(ComparisonReport {
        common_reaching_time: common,
        sup_adaptive_gain: Pair {
            a: ma.sup_adaptive_gain.unwrap_or(0.0),
            b: mb.sup_adaptive_gain.unwrap_or(0.0),
        },
        sup_abs_s_post_reaching: Pair {
            a: sup_from(ta, common),
            b: sup_from(tb, common),
        },
        sup_abs_s_tail: Pair {
            a: sup_from(ta, tail),
            b: sup_from(tb, tail),
        },
        chattering_index: Pair {
            a: ma.chattering_index,
            b: mb.chattering_index,
        },
        a: ma,
        b: mb,
    })
}
