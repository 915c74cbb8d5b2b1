//! Running scenarios and writing their artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use itsmc_core::engine::{run, Trajectory};
use itsmc_core::metrics::{compare_runs, evaluate, MetricsReport};
use itsmc_core::scenario::Scenario;

use crate::output::{csv_string, ComparisonDoc, MetricsDoc};
use crate::SimError;

pub struct RunOutput {
    pub trajectory: Trajectory,
    pub metrics: MetricsReport,
    pub doc: MetricsDoc,
}

impl RunOutput {
    pub fn csv(&self) -> Result<String, SimError> {
        csv_string(&self.trajectory, 1)
    }

    pub fn json(&self) -> Result<String, SimError> {
        self.doc.to_json()
    }
}

pub fn execute(sc: &Scenario) -> Result<RunOutput, SimError> {
    let trajectory = run(sc)?;
    let metrics = evaluate(sc, &trajectory)?;
    let doc = MetricsDoc::new(sc, &metrics);
    Ok(RunOutput {
        trajectory,
        metrics,
        doc,
    })
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), SimError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let file_name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{file_name}.{}.tmp", std::process::id()));
    fs::write(&tmp, contents).map_err(|e| SimError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| SimError::io(path, e))
}

/// Paths written for one scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Written {
    pub csv: PathBuf,
    pub metrics: PathBuf,
}

pub fn run_to_dir(sc: &Scenario, out: &Path) -> Result<Written, SimError> {
    let res = execute(sc)?;
    let csv = out.join(format!("{}.csv", sc.name));
    let metrics = out.join(format!("{}.metrics.json", sc.name));
    write_atomic(&csv, &res.csv()?)?;
    write_atomic(&metrics, &res.json()?)?;
    Ok(Written { csv, metrics })
}

/// Runs independent scenarios on separate threads. Results keep the input
/// order.
pub fn run_batch(scenarios: &[Scenario], out: &Path) -> Result<Vec<Result<Written, SimError>>, SimError> {
    fs::create_dir_all(out).map_err(|e| SimError::io(out, e))?;
    let mut names: Vec<&str> = scenarios.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(SimError::Schema("scenario names in one batch must be unique".into()));
    }
    Ok(std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|sc| scope.spawn(move || run_to_dir(sc, out)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    }))
}

pub fn compare_to_dir(a: &Scenario, b: &Scenario, out: &Path) -> Result<(ComparisonDoc, PathBuf), SimError> {
    fs::create_dir_all(out).map_err(|e| SimError::io(out, e))?;
    let (ta, tb) = std::thread::scope(|scope| {
        let ha = scope.spawn(|| run(a));
        let hb = scope.spawn(|| run(b));
        (ha.join().expect("run thread panicked"), hb.join().expect("run thread panicked"))
    });
    let report = compare_runs(a, &ta?, b, &tb?)?;
    let doc = ComparisonDoc::new(a, b, &report);
    let path = out.join(format!("{}_vs_{}.json", a.name, b.name));
    write_atomic(&path, &doc.to_json()?)?;
    Ok((doc, path))
}
