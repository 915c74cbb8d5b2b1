//! Golden regression files.
//!
//! Each golden scenario in `scenarios/` has a frozen metrics document and a
//! decimated trajectory in `golden/`. Set `ITSMC_BLESS=1` to rewrite them.

use std::path::{Path, PathBuf};

use itsmc_core::scenario::Scenario;
use serde_json::Value;

use crate::config;
use crate::output::csv_string;
use crate::runner::{execute, write_atomic, RunOutput};
use crate::SimError;

pub const BLESS_VAR: &str = "ITSMC_BLESS";
/// Every `GOLDEN_STRIDE`-th sample is kept in the golden trajectory.
pub const GOLDEN_STRIDE: usize = 100;
const REL_TOL: f64 = 1e-9;

pub fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("golden")
}

/// Names of the scenario files shipped with the crate, sorted.
pub fn golden_names() -> Result<Vec<String>, SimError> {
    let dir = scenario_dir();
    let mut names = Vec::new();
    for entry in std::fs::read_dir(&dir).map_err(|e| SimError::io(&dir, e))? {
        let path = entry.map_err(|e| SimError::io(&dir, e))?.path();
        if path.extension().is_some_and(|e| e == "toml") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                names.push(stem.to_string());
            }
        }
    }
    names.sort();
    Ok(names)
}

pub fn load_named(name: &str) -> Result<Scenario, SimError> {
    config::load(&scenario_dir().join(format!("{name}.toml")))
}

fn blessing() -> bool {
    std::env::var(BLESS_VAR).is_ok_and(|v| !v.is_empty() && v != "0")
}

/// Runs the named golden scenario and checks it against the frozen files,
/// or rewrites them when blessing. Returns the run for further checks.
pub fn check(name: &str) -> Result<(Scenario, RunOutput), String> {
    let sc = load_named(name).map_err(|e| e.to_string())?;
    let out = execute(&sc).map_err(|e| e.to_string())?;
    let csv = csv_string(&out.trajectory, GOLDEN_STRIDE).map_err(|e| e.to_string())?;
    let json = out.json().map_err(|e| e.to_string())?;
    let csv_path = golden_dir().join(format!("{name}.csv"));
    let json_path = golden_dir().join(format!("{name}.metrics.json"));
    if blessing() {
        std::fs::create_dir_all(golden_dir()).map_err(|e| e.to_string())?;
        write_atomic(&csv_path, &csv).map_err(|e| e.to_string())?;
        write_atomic(&json_path, &json).map_err(|e| e.to_string())?;
        return Ok((sc, out));
    }
    let read = |p: &Path| {
        std::fs::read_to_string(p).map_err(|e| format!("{}: {e} (run with {BLESS_VAR}=1 to create)", p.display()))
    };
    let frozen_json: Value = serde_json::from_str(&read(&json_path)?).map_err(|e| e.to_string())?;
    let fresh_json: Value = serde_json::from_str(&json).map_err(|e| e.to_string())?;
    compare_values(&frozen_json, &fresh_json, "metrics")?;
    compare_csv(&read(&csv_path)?, &csv)?;
    Ok((sc, out))
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(1e-300) || (a - b).abs() <= 1e-15
}

/// Structural equality with a relative tolerance on numbers.
pub fn compare_values(frozen: &Value, fresh: &Value, at: &str) -> Result<(), String> {
    match (frozen, fresh) {
        (Value::Number(a), Value::Number(b)) => {
            let (a, b) = (a.as_f64().unwrap_or(f64::NAN), b.as_f64().unwrap_or(f64::NAN));
            if close(a, b) {
                Ok(())
            } else {
                Err(format!("{at}: frozen {a} vs fresh {b}"))
            }
        }
        (Value::Object(a), Value::Object(b)) => {
            if a.len() != b.len() || a.keys().any(|k| !b.contains_key(k)) {
                return Err(format!("{at}: field sets differ"));
            }
            a.iter().try_for_each(|(k, v)| compare_values(v, &b[k], &format!("{at}.{k}")))
        }
        (a, b) if a == b => Ok(()),
        (a, b) => Err(format!("{at}: frozen {a} vs fresh {b}")),
    }
}

fn compare_csv(frozen: &str, fresh: &str) -> Result<(), String> {
    let (fl, nl): (Vec<&str>, Vec<&str>) = (frozen.lines().collect(), fresh.lines().collect());
    if fl.len() != nl.len() || fl.first() != nl.first() {
        return Err("trajectory: header or row count differs".into());
    }
    for (row, (a, b)) in fl.iter().zip(&nl).enumerate().skip(1) {
        for (col, (x, y)) in a.split(',').zip(b.split(',')).enumerate() {
            let (x, y): (f64, f64) = (x.parse().map_err(|_| "bad number")?, y.parse().map_err(|_| "bad number")?);
            // The CSV carries 12 significant digits; allow one unit in the last place.
            if !(x == y || (x - y).abs() <= 2e-11 * x.abs().max(y.abs()) || (x - y).abs() <= 1e-15) {
                return Err(format!("trajectory row {row} column {col}: frozen {x} vs fresh {y}"));
            }
        }
    }
    Ok(())
}
