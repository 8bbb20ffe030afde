//! Result serialization: fixed-column CSV for rate reports and validation
//! tables, and a JSON manifest describing how a run was produced.

use super::{RateReport, ValidationTable};
use crate::config::SystemConfig;
use crate::error::Result;
use serde::Serialize;
use std::fs;
use std::path::Path;

/// Formats a float with 9 significant digits, deterministically.
fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Renders a rate report as CSV. Columns, in fixed order:
/// axis_value, algorithm, mean_sum_rate, std_err, trials, invalid_trials.
pub fn rate_csv(report: &RateReport) -> String {
    let mut out = String::from("axis_value,algorithm,mean_sum_rate,std_err,trials,invalid_trials\n");
    for point in &report.points {
        for s in &point.stats {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                sig9(point.axis_value),
                s.algorithm,
                sig9(s.mean_sum_rate),
                sig9(s.std_err),
                s.trials,
                s.invalid_trials,
            ));
        }
    }
    out
}

/// Renders a validation table as CSV with one row per (scenario, bits).
pub fn validation_csv(table: &ValidationTable) -> String {
    let mut out = String::from(
        "scenario,bits,rho,closed_form,mc_mean,mc_std_err,rel_gap,trials,invalid_trials\n",
    );
    for r in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.scenario,
            r.bits,
            sig9(r.rho),
            sig9(r.closed_form),
            sig9(r.mc_mean),
            sig9(r.mc_std_err),
            sig9(r.rel_gap),
            r.trials,
            r.invalid_trials,
        ));
    }
    out
}

/// Everything needed to reproduce a run, serialized alongside its CSV.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    /// Which subcommand or entry point produced the run.
    pub command: String,
    pub config: SystemConfig,
    pub algorithms: Vec<String>,
    pub axis: String,
    pub axis_values: Vec<String>,
    pub trials: usize,
    pub wall_time_secs: f64,
    /// Package versions the run was built from.
    pub versions: Versions,
    /// Caveats that apply to the results (e.g. reconstructed baselines).
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Versions {
    pub core: &'static str,
}

impl Versions {
    pub fn current() -> Self {
        Versions { core: env!("CARGO_PKG_VERSION") }
    }
}

impl RunManifest {
    pub fn new(command: &str, report: &RateReport, algorithms: &[crate::schedulers::Algorithm]) -> Self {
        let mut notes = Vec::new();
        if algorithms.contains(&crate::schedulers::Algorithm::Mbas) {
            notes.push(
                "mbas is an approximate reconstruction of a beam-aggregation baseline; \
                 treat its results as indicative rather than reference values"
                    .to_string(),
            );
        }
        RunManifest {
            command: command.to_string(),
            config: report.config.clone(),
            algorithms: algorithms.iter().map(|a| a.to_string()).collect(),
            axis: report.axis.clone(),
            axis_values: report.points.iter().map(|p| p.axis_value.to_string()).collect(),
            trials: report.trials,
            wall_time_secs: report.wall_time_secs,
            versions: Versions::current(),
            notes,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| crate::error::Error::Numerical(format!("manifest serialization: {e}")))
    }
}

/// Writes `content` to `path`, creating parent directories as needed.
pub fn write_text(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, content)?;
    Ok(())
}
