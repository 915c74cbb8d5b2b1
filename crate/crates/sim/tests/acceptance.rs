//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::time::{Duration, Instant};

use itsmc_core::controllers::AdoGains;
use itsmc_core::observer::AdoParams;
use itsmc_core::engine::{run, Trajectory};
use itsmc_core::metrics::{compare_runs, lyapunov_check, lyapunov_tolerance, scenario_bounds, sliding_decrease_fraction};
use itsmc_core::plants::Handle;
use itsmc_core::numerics::{alpha_chain, is_hurwitz, integrate_step, IntegratorConfig, Method, Polynomial};
use itsmc_core::scenario::{ChainController, Scenario, System};
use itsmc_sim::golden::{self, golden_dir, golden_names, load_named};
use itsmc_sim::runner::execute;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn timed_run(sc: &Scenario) -> Result<(Trajectory, Duration), String> {
    let t0 = Instant::now();
    let tr = run(sc).map_err(|e| e.to_string())?;
    Ok((tr, t0.elapsed()))
}

fn col<'a>(tr: &'a Trajectory, name: &str) -> &'a [f64] {
    tr.column(name).unwrap_or_else(|| panic!("missing column {name}"))
}

fn sup(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn frozen_metric(name: &str, field: &str) -> Result<f64, String> {
    let path = golden_dir().join(format!("{name}.metrics.json"));
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    v[field].as_f64().ok_or_else(|| format!("{field} missing from {}", path.display()))
}

fn example1() -> Check {
    let (sc, out) = golden::check("example1")?;
    let (tr, elapsed) = timed_run(&sc)?;
    let s = col(&tr, "s");
    ensure(s[0] == 0.0, format!("s(0) = {}", s[0]))?;
    let sup_s = sup(s.iter().copied());
    let eps = out.metrics.real_sliding_epsilon;
    ensure(sup_s <= eps, format!("sup|s| = {sup_s:e} exceeds epsilon {eps:e}"))?;
    ensure(sup_s <= 1e-3, format!("sup|s| = {sup_s:e} exceeds 1e-3"))?;
    let x_end = out.metrics.final_state_norm;
    ensure(x_end < 1e-2, format!("|x(10)| = {x_end:e}"))?;
    let ci = out.metrics.chattering_index;
    let frozen = frozen_metric("example1", "chattering_index")?;
    ensure(ci <= 2.0 * frozen && ci >= 0.5 * frozen, format!("chattering {ci} vs frozen {frozen}"))?;
    // Continuity: with b = 1 and f_n = 0 the part of u beyond the
    // equivalent control is u - z'(x). Its largest per-step jump must stay far
    // below the 2 (eta + d_max) jump of the switching law.
    let jump = |sc: &Scenario, tr: &Trajectory| -> Result<f64, String> {
        let System::Chain(c) = &sc.system else { unreachable!() };
        ensure(c.plant.f_n == Handle::Zero && c.plant.b == Handle::Constant(1.0), "continuity check assumes b = 1, f_n = 0")?;
        let (x, u) = (tr.group("x"), col(tr, "u"));
        let inner: Vec<f64> = (0..tr.len())
            .map(|k| u[k] - c.manifold.z_rate(&x.iter().map(|xi| xi[k]).collect::<Vec<_>>()).unwrap())
            .collect();
        Ok(inner.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max))
    };
    let stc_jump = jump(&sc, &tr)?;
    let dis = load_named("switching").map_err(|e| e.to_string())?;
    let dis_jump = jump(&dis, &run(&dis).map_err(|e| e.to_string())?)?;
    ensure(stc_jump < 0.1 * dis_jump, format!("max inner |du| = {stc_jump} against {dis_jump} for switching"))?;
    ensure(elapsed < Duration::from_secs(5), format!("runtime {elapsed:?}"))?;
    Ok(format!(
        "s(0)=0, sup|s|={sup_s:.2e} <= eps={eps:.2e}, |x(10)|={x_end:.2e}, CI={ci:.2} (frozen {frozen:.2}), max inner |du|={stc_jump:.2e} (switching {dis_jump:.2}), {elapsed:.2?}"
    ))
}

/// First strict interior local maximum followed later by a drop of at least
/// 10 % of that maximum.
fn non_monotone(k: &[f64]) -> Option<(usize, f64)> {
    (1..k.len() - 1)
        .filter(|&i| k[i] > k[i - 1] && k[i] > k[i + 1] && k[i] > 0.0)
        .find(|&i| k[i + 1..].iter().any(|&v| v <= 0.9 * k[i]))
        .map(|i| (i, k[i]))
}

fn example2() -> Check {
    let (sc, out) = golden::check("example2")?;
    let (tr, elapsed) = timed_run(&sc)?;
    let b = out.metrics.ultimate_bound_theoretical.ok_or("no theoretical bound")?;
    let t_r = out.metrics.reaching_time_observed.ok_or("Lyapunov level never reached")?;
    let (t, s, dt) = (col(&tr, "t"), col(&tr, "s"), col(&tr, "d_tilde"));
    let obs = sup((0..tr.len()).filter(|&k| t[k] >= t_r).map(|k| s[k].hypot(dt[k])));
    ensure(obs <= 1.5 * b, format!("sup |(s, d_tilde)| = {obs} exceeds 1.5 B = {}", 1.5 * b))?;
    let (i, peak) = non_monotone(col(&tr, "k_hat")).ok_or("k_hat has no local maximum followed by a 10% drop")?;
    ensure(elapsed < Duration::from_secs(5), format!("runtime {elapsed:?}"))?;
    Ok(format!(
        "sup_(t>={t_r}) |(s,d_tilde)|={obs:.3} <= 1.5B={:.2}, k_hat local max {peak:.4} at t={:.3} then drops >=10%, {elapsed:.2?}",
        1.5 * b,
        t[i]
    ))
}

fn observer_run(sc: &Scenario) -> Result<(f64, f64, f64, f64), String> {
    let tr = run(sc).map_err(|e| e.to_string())?;
    let b = scenario_bounds(sc).map_err(|e| e.to_string())?.ok_or("no bounds")?;
    let v = col(&tr, "V");
    let bound = b.reaching_time(v[0]).map_err(|e| e.to_string())?;
    let observed = itsmc_core::metrics::detect_real_sliding(col(&tr, "t"), v, b.level()).unwrap_or(f64::INFINITY);
    let frac = lyapunov_check(v, sc.integrator.step_size, b.gamma, b.delta_bar, b.level(), lyapunov_tolerance(v[0]));
    ensure(observed <= bound, format!("{}: observed {observed} > bound {bound}", sc.name))?;
    ensure(frac <= 0.01, format!("{}: Lyapunov violations {frac}", sc.name))?;
    Ok((v[0] / b.level(), observed, bound, frac))
}

fn ado(sc: &mut Scenario) -> (&mut AdoGains, &mut AdoParams, &mut f64) {
    match &mut sc.system {
        System::Chain(c) => match &mut c.controller {
            ChainController::Ado { gains, params, k_hat0 } => (gains, params, k_hat0),
            _ => unreachable!(),
        },
        _ => unreachable!(),
    }
}

fn observer_bounds() -> Check {
    let base = load_named("example2").map_err(|e| e.to_string())?;
    let mut lines = vec![];
    let (r, o, b, f) = observer_run(&base)?;
    lines.push(format!("example2 V0/R={r:.2} t_r={o:.3}<={b:.3} viol={f:.4}"));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let k = 2.0 * std::f64::consts::PI;
    for i in 0..5 {
        let mut sc = base.clone();
        sc.name = format!("random{i}");
        let (gains, params, _) = ado(&mut sc);
        params.mu = rng.random_range(0.5..3.0);
        params.tau = params.mu + 1.0 + rng.random_range(0.5..6.0);
        params.lambda = rng.random_range(1.0..10.0);
        gains.kappa = 0.5 * params.mu + rng.random_range(0.5..8.0);
        // d_tilde(0) = 0 and s(0) = 0, so V(0) = (k - k_hat0)^2 / 2.
        let level = scenario_bounds(&sc).map_err(|e| e.to_string())?.ok_or("no bounds")?.level();
        let v0 = rng.random_range(2.0..10.0) * level;
        *ado(&mut sc).2 = k + (2.0 * v0).sqrt();
        sc.validate().map_err(|e| e.to_string())?;
        let (r, o, b, f) = observer_run(&sc)?;
        lines.push(format!("set{i} V0/R={r:.2} t_r={o:.3}<={b:.3} viol={f:.4}"));
    }
    Ok(lines.join("; "))
}

fn switching_reaching() -> Check {
    let mut lines = vec![];
    for name in ["switching", "switching_offset"] {
        let sc = load_named(name).map_err(|e| e.to_string())?;
        let System::Chain(c) = &sc.system else { unreachable!() };
        let ChainController::Dis { gains, .. } = &c.controller else { unreachable!() };
        let eps = gains.switching_gain() * sc.integrator.step_size;
        ensure(c.plant.d_max == Some(gains.d_max), "d_max must be declared on the plant")?;
        ensure(
            (sc.metrics.epsilon.unwrap_or(0.0) - eps).abs() < 1e-15,
            "scenario epsilon differs from (eta + d_max + f_max) h",
        )?;
        let tr = run(&sc).map_err(|e| e.to_string())?;
        let s = col(&tr, "s");
        let outside = s.iter().filter(|v| v.abs() > eps).count();
        let frac = sliding_decrease_fraction(s, eps).ok_or(format!("{name}: no samples outside epsilon"))?;
        ensure(frac >= 0.99, format!("{name}: s ds <= 0 at only {frac}"))?;
        lines.push(format!("{name}: {:.4} of {outside} samples with |s|>{eps:.1e}", frac));
    }
    Ok(lines.join("; "))
}

fn comparison() -> Check {
    let mut lines = vec![];
    for d in ["sine", "ramp"] {
        let (a, b) = (
            load_named(&format!("compare_{d}_ado")).map_err(|e| e.to_string())?,
            load_named(&format!("compare_{d}_astw")).map_err(|e| e.to_string())?,
        );
        let (ta, tb) = (run(&a).map_err(|e| e.to_string())?, run(&b).map_err(|e| e.to_string())?);
        let r = compare_runs(&a, &ta, &b, &tb).map_err(|e| e.to_string())?;
        let line = format!(
            "{d}: sup gain {:.3} vs {:.3}, sup|s| after t={} {:.4} vs {:.4} (tail {:.4} vs {:.4})",
            r.sup_adaptive_gain.a,
            r.sup_adaptive_gain.b,
            r.common_reaching_time,
            r.sup_abs_s_post_reaching.a,
            r.sup_abs_s_post_reaching.b,
            r.sup_abs_s_tail.a,
            r.sup_abs_s_tail.b
        );
        ensure(r.gain_verdict() && r.sliding_verdict(), line.clone())?;
        lines.push(line);
    }
    Ok(lines.join("; "))
}

fn spacecraft() -> Check {
    let (sc, out) = golden::check("spacecraft")?;
    let (tr, elapsed) = timed_run(&sc)?;
    let drift = tr.quaternion_drift.ok_or("no drift record")?;
    let norm_err = (0..tr.len())
        .map(|k| (1..=3).fold(col(&tr, "q0")[k].powi(2), |a, i| a + col(&tr, &format!("q{i}"))[k].powi(2)) - 1.0)
        .fold(0.0, |m: f64, e| m.max(e.abs()));
    ensure(drift <= 1e-6 && norm_err <= 1e-6, format!("quaternion drift {drift:e}, recorded {norm_err:e}"))?;
    let b = scenario_bounds(&sc).map_err(|e| e.to_string())?.ok_or("no bounds")?;
    let radius = b.ultimate_bound;
    let t_r = out.metrics.reaching_time_observed.ok_or("Lyapunov level never reached")?;
    let s = tr.group_norm("s");
    let t = tr.time();
    let post = sup((0..tr.len()).filter(|&k| t[k] >= t_r).map(|k| s[k]));
    ensure(post <= 1.5 * radius, format!("sup |s| after t_r = {post} > {}", 1.5 * radius))?;
    let viol = out.metrics.lyapunov_violation_fraction.unwrap_or(1.0);
    ensure(viol <= 0.01, format!("Lyapunov violations {viol}"))?;
    let biggest = tr
        .columns
        .iter()
        .filter(|(n, _)| n != "t")
        .map(|(_, c)| sup(c.iter().copied()))
        .fold(0.0, f64::max);
    ensure(biggest.is_finite() && biggest < 1e3, format!("signal magnitude {biggest}"))?;
    ensure(elapsed < Duration::from_secs(10), format!("runtime {elapsed:?}"))?;
    Ok(format!(
        "drift={drift:.1e}, sup|s| after t_r={t_r}: {post:.2e} <= {:.3}, viol={viol}, max signal {biggest:.3}, {elapsed:.2?}",
        1.5 * radius
    ))
}

/// Roots of a monic polynomial from the companion matrix.
fn max_real_root(c: &[f64]) -> f64 {
    let n = c.len() - 1;
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i == 0 {
            -c[j + 1]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    m.complex_eigenvalues().iter().map(|z| z.re).fold(f64::MIN, f64::max)
}

fn unit_oracles() -> Check {
    let chain = alpha_chain(3, 0.7).map_err(|e| e.to_string())?;
    let exact = [7.0 / 16.0, 7.0 / 13.0, 7.0 / 10.0];
    ensure(chain.iter().zip(exact).all(|(a, b)| (a - b).abs() <= 1e-12), format!("alpha_chain {chain:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    let mut stable = 0;
    while checked < 200 {
        let deg = rng.random_range(1..=5);
        let mut c = vec![1.0];
        c.extend((0..deg).map(|_| rng.random_range(-2.0..12.0)));
        let re = max_real_root(&c);
        if re.abs() < 1e-6 {
            continue;
        }
        let ours = is_hurwitz(&Polynomial::new(c.clone()).map_err(|e| e.to_string())?);
        ensure(ours == (re < 0.0), format!("is_hurwitz disagrees on {c:?} (max Re {re})"))?;
        stable += usize::from(ours);
        checked += 1;
    }

    let cfg = IntegratorConfig::new(1.0, Method::Rk4).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for i in 0..=100 {
        let z = -0.5 + i as f64 * 0.01;
        let x = integrate_step(|_, x, dx| dx[0] = z * x[0], 0.0, &[1.0], &cfg).map_err(|e| e.to_string())?;
        let err = (x[0] - z.exp()).abs();
        ensure(err <= z.abs().powi(5), format!("RK4 error {err:e} at z = {z}"))?;
        worst = worst.max(if z == 0.0 { 0.0 } else { err / z.abs().powi(5) });
    }

    let reduced = reduced_dynamics_error()?;
    ensure(reduced <= 1e-6, format!("reduced dynamics mismatch {reduced:e}"))?;
    Ok(format!(
        "alpha_chain exact, is_hurwitz agrees on 200 polynomials ({stable} stable), RK4 err/|z|^5 <= {worst:.4}, reduced dynamics sup error {reduced:.1e}"
    ))
}

fn sig(x: f64, a: f64) -> f64 {
    x.abs().powf(a) * x.signum() * f64::from(u8::from(x != 0.0))
}

/// Closed loop of `example1` with `d = 0` against an independent RK4
/// integration of `x_i' = x_{i+1}`, `x_n' = -sum C_i sig(x_i)^{a_i}`.
fn reduced_dynamics_error() -> Result<f64, String> {
    let mut sc = load_named("example1").map_err(|e| e.to_string())?.without_disturbance();
    sc.horizon = 5.0;
    let tr = run(&sc).map_err(|e| e.to_string())?;
    let (c, a) = ([80.0, 66.0, 15.0], [7.0 / 16.0, 7.0 / 13.0, 0.7]);
    let f = |x: [f64; 3]| [x[1], x[2], -(0..3).map(|i| c[i] * sig(x[i], a[i])).sum::<f64>()];
    let h = sc.integrator.step_size;
    let mut x = [1.0, -1.0, 0.5];
    let mut err: f64 = 0.0;
    for k in 0..tr.len() {
        for (i, xi) in x.iter().enumerate() {
            err = err.max((col(&tr, &format!("x{}", i + 1))[k] - xi).abs());
        }
        let add = |x: [f64; 3], d: [f64; 3], s: f64| [x[0] + s * d[0], x[1] + s * d[1], x[2] + s * d[2]];
        let k1 = f(x);
        let k2 = f(add(x, k1, h / 2.0));
        let k3 = f(add(x, k2, h / 2.0));
        let k4 = f(add(x, k3, h));
        x = [0, 1, 2].map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    Ok(err)
}

fn determinism() -> Check {
    let names = golden_names().map_err(|e| e.to_string())?;
    for name in &names {
        let sc = load_named(name).map_err(|e| e.to_string())?;
        let (a, b) = (execute(&sc).map_err(|e| e.to_string())?, execute(&sc).map_err(|e| e.to_string())?);
        ensure(a.csv().unwrap() == b.csv().unwrap(), format!("{name}: CSV differs"))?;
        ensure(a.json().unwrap() == b.json().unwrap(), format!("{name}: metrics JSON differs"))?;
    }
    Ok(format!("{} golden scenarios byte-identical across two runs", names.len()))
}

fn main() {
    type Criterion = (&'static str, fn() -> Check);
    let criteria: [Criterion; 8] = [
        ("example I reproduction", example1),
        ("example II reproduction", example2),
        ("reaching-time bound and Lyapunov decrease", observer_bounds),
        ("switching law drives s toward zero", switching_reaching),
        ("comparison with adaptive super-twisting", comparison),
        ("spacecraft attitude case", spacecraft),
        ("unit oracles", unit_oracles),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
