//! Trajectory CSV and metrics JSON.

use std::io::{Read, Write};

use itsmc_core::engine::Trajectory;
use itsmc_core::metrics::{ComparisonReport, MetricsReport, Pair};
use itsmc_core::scenario::Scenario;
use serde::{Deserialize, Serialize};

use crate::SimError;

pub const METRICS_SCHEMA: &str = "itsmc-metrics/1";
pub const COMPARISON_SCHEMA: &str = "itsmc-comparison/1";

/// Twelve significant digits: fixed notation for magnitudes in
/// `[1e-4, 1e12)`, scientific otherwise.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.11e}")
    }
}

/// Writes every `stride`-th row (always including the last one).
pub fn write_csv<W: Write>(tr: &Trajectory, out: W, stride: usize) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(tr.names())?;
    let n = tr.len();
    let stride = stride.max(1);
    let mut rows: Vec<usize> = (0..n).step_by(stride).collect();
    if n > 0 && rows.last() != Some(&(n - 1)) {
        rows.push(n - 1);
    }
    for k in rows {
        w.write_record(tr.columns.iter().map(|(_, c)| format_value(c[k])))?;
    }
    w.flush().map_err(|e| SimError::Trajectory(e.to_string()))?;
    Ok(())
}

pub fn csv_string(tr: &Trajectory, stride: usize) -> Result<String, SimError> {
    let mut buf = Vec::new();
    write_csv(tr, &mut buf, stride)?;
    String::from_utf8(buf).map_err(|e| SimError::Trajectory(e.to_string()))
}

/// Reads a trajectory written by [`write_csv`] with stride 1.
pub fn read_csv<R: Read>(input: R, step: f64, horizon: f64) -> Result<Trajectory, SimError> {
    let mut r = csv::Reader::from_reader(input);
    let names: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if names.first().map(String::as_str) != Some("t") {
        return Err(SimError::Trajectory("first column must be t".into()));
    }
    let mut tr = Trajectory::new(step, horizon, &names);
    for rec in r.records() {
        let rec = rec?;
        for ((_, col), field) in tr.columns.iter_mut().zip(rec.iter()) {
            let v: f64 = field
                .parse()
                .map_err(|_| SimError::Trajectory(format!("not a number: {field:?}")))?;
            col.push(v);
        }
    }
    if tr.len() < 2 {
        return Err(SimError::Trajectory("need at least two samples".into()));
    }
    let t = tr.time();
    if t.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > 1e-9 * step.max(1.0)) {
        return Err(SimError::Trajectory("time grid does not match the scenario step".into()));
    }
    Ok(tr)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsDoc {
    pub schema_version: String,
    pub scenario: String,
    pub controller: String,
    pub seed: u64,
    pub horizon: f64,
    pub step: f64,
    pub samples: usize,
    pub reached: bool,
    pub reaching_time_observed: Option<f64>,
    pub reaching_time_bound: Option<f64>,
    pub ultimate_bound_theoretical: Option<f64>,
    pub ultimate_bound_observed: f64,
    pub chattering_index: f64,
    pub lyapunov_violation_fraction: Option<f64>,
    pub real_sliding_epsilon: f64,
    pub sup_abs_s: f64,
    pub sup_abs_s_post_reaching: Option<f64>,
    pub sup_adaptive_gain: Option<f64>,
    pub final_state_norm: f64,
    pub quaternion_norm_drift: Option<f64>,
}

impl MetricsDoc {
    pub fn new(sc: &Scenario, m: &MetricsReport) -> Self {
        Self {
            schema_version: METRICS_SCHEMA.into(),
            scenario: sc.name.clone(),
            controller: sc.controller_kind().into(),
            seed: sc.seed,
            horizon: sc.horizon,
            step: sc.integrator.step_size,
            samples: sc.sample_count(),
            reached: m.reaching_time_observed.is_some(),
            reaching_time_observed: m.reaching_time_observed,
            reaching_time_bound: m.reaching_time_bound,
            ultimate_bound_theoretical: m.ultimate_bound_theoretical,
            ultimate_bound_observed: m.ultimate_bound_observed,
            chattering_index: m.chattering_index,
            lyapunov_violation_fraction: m.lyapunov_violation_fraction,
            real_sliding_epsilon: m.real_sliding_epsilon,
            sup_abs_s: m.sup_abs_s,
            sup_abs_s_post_reaching: m.sup_abs_s_post_reaching,
            sup_adaptive_gain: m.sup_adaptive_gain,
            final_state_norm: m.final_state_norm,
            quaternion_norm_drift: m.quaternion_norm_drift,
        }
    }

    pub fn to_json(&self) -> Result<String, SimError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDoc {
    pub a: f64,
    pub b: f64,
    pub delta: f64,
    pub a_below_b: bool,
}

impl From<Pair> for PairDoc {
    fn from(p: Pair) -> Self {
        Self {
            a: p.a,
            b: p.b,
            delta: p.delta(),
            a_below_b: p.a_below_b(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonDoc {
    pub schema_version: String,
    pub a: String,
    pub b: String,
    pub common_reaching_time: f64,
    pub sup_adaptive_gain: PairDoc,
    pub sup_abs_s_post_reaching: PairDoc,
    pub sup_abs_s_tail: PairDoc,
    pub chattering_index: PairDoc,
    pub metrics_a: MetricsDoc,
    pub metrics_b: MetricsDoc,
}

impl ComparisonDoc {
    pub fn new(a: &Scenario, b: &Scenario, r: &ComparisonReport) -> Self {
        Self {
            schema_version: COMPARISON_SCHEMA.into(),
            a: a.name.clone(),
            b: b.name.clone(),
            common_reaching_time: r.common_reaching_time,
            sup_adaptive_gain: r.sup_adaptive_gain.into(),
            sup_abs_s_post_reaching: r.sup_abs_s_post_reaching.into(),
            sup_abs_s_tail: r.sup_abs_s_tail.into(),
            chattering_index: r.chattering_index.into(),
            metrics_a: MetricsDoc::new(a, &r.a),
            metrics_b: MetricsDoc::new(b, &r.b),
        }
    }

    pub fn to_json(&self) -> Result<String, SimError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}
