//! Experiment harness: configuration, reports, CSV output and dispatch.
//!
//! A run configuration is a JSON document:
//!
//! ```json
//! { "seed": 1, "mode": "float", "replicas": 1000,
//!   "experiments": [ { "name": "origin-column", "experiment": "monotonicity",
//!                      "kernel": { "kind": "lattice", "d": 1, "R": 30 },
//!                      "mu": "{0:1/4,2:3/4}", "nu": "{2:1}",
//!                      "sets": [ { "kind": "origin" } ], "horizon": 60 } ] }
//! ```
//!
//! Every experiment writes `<name>.csv`, and the run writes `summary.csv`. Each file
//! starts with `#` lines recording the version, seed, mode, replica count, random
//! generator and the experiment's full configuration, so a file alone is enough
//! to reproduce it.

pub mod commands;
mod experiments;
pub mod stats;

use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::EngineError;
use crate::offspring::OffspringDist;
use crate::orders::OrderError;
use crate::parallel::Execution;
use crate::rng::RNG_NAME;
use crate::scalar::ArithmeticMode;
use crate::simulate::SimError;
use crate::statespace::{KernelError, KernelSpec, SetSpec};

pub use experiments::{
    dyadic_cover_experiment, displacement_experiment, intersection_experiment, monotonicity_experiment,
};
pub use stats::{dominance_margin, Estimate, DECISION_SES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ASSERTION: i32 = 3;

/// Relative change tolerated by the window-doubling audit.
pub const AUDIT_TOLERANCE: f64 = 1e-3;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
    #[error("precondition failed in `{experiment}`: {reason}")]
    Precondition { experiment: String, reason: String },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        EXIT_CONFIG
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Monotonicity,
    Displacement,
    Intersection,
    DyadicCover,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::Monotonicity => "monotonicity",
            ExperimentKind::Displacement => "displacement",
            ExperimentKind::Intersection => "intersection",
            ExperimentKind::DyadicCover => "dyadic_cover",
        })
    }
}

fn default_replicas() -> u64 {
    1000
}

fn default_t() -> String {
    "1/2".into()
}

fn default_levels() -> Vec<u64> {
    (0..=20).map(|i| 1u64 << (2 * i)).collect()
}

fn default_true() -> bool {
    true
}

fn default_classify_threshold() -> f64 {
    0.05
}

fn default_dyadic_alpha() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: ArithmeticMode,
    #[serde(default = "default_replicas")]
    pub replicas: u64,
    #[serde(default)]
    pub experiments: Vec<ExperimentConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub experiment: ExperimentKind,
    pub kernel: KernelSpec,
    pub mu: OffspringDist,
    pub nu: OffspringDist,
    /// Second pair for the intersection experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu2: Option<OffspringDist>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu2: Option<OffspringDist>,
    #[serde(default)]
    pub sets: Vec<SetSpec>,
    pub horizon: u32,
    /// Per-experiment overrides of the run-level values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicas: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ArithmeticMode>,
    /// Argument of `E[t^L]` in the engine arm.
    #[serde(default = "default_t")]
    pub t: String,
    /// Escalating thresholds `m` for the events `{L ≥ m}`.
    #[serde(default = "default_levels")]
    pub levels: Vec<u64>,
    /// Recompute engine quantities on the doubled window.
    #[serde(default = "default_true")]
    pub audit: bool,
    /// `τ` of the three-way classification at the top level.
    #[serde(default = "default_classify_threshold")]
    pub classify_threshold: f64,
    /// Bound on generation sizes in the simulator (default `2^62`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<u64>,
    /// Exponent of the random dyadic cube sets.
    #[serde(default = "default_dyadic_alpha")]
    pub dyadic_alpha: f64,
}

impl RunConfig {
    /// Parses a configuration, naming the offending field and position on error.
    pub fn from_json(text: &str) -> Result<RunConfig, LabError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            LabError::Config(format!("field `{path}`: {}", e.into_inner()))
        })
    }

    pub fn from_path(path: &Path) -> Result<RunConfig, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    /// Command-line values replace both run-level and per-experiment values.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
            self.experiments.iter_mut().for_each(|e| e.seed = None);
        }
        if let Some(r) = o.replicas {
            self.replicas = r;
            self.experiments.iter_mut().for_each(|e| e.replicas = None);
        }
        if let Some(m) = o.mode {
            self.mode = m;
            self.experiments.iter_mut().for_each(|e| e.mode = None);
        }
    }

    pub fn resolve(&self, e: &ExperimentConfig) -> Resolved {
        Resolved {
            seed: e.seed.unwrap_or(self.seed),
            replicas: e.replicas.unwrap_or(self.replicas),
            mode: e.mode.unwrap_or(self.mode),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replicas: Option<u64>,
    pub mode: Option<ArithmeticMode>,
}

/// Seed, replica count and arithmetic mode in force for one experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolved {
    pub seed: u64,
    pub replicas: u64,
    pub mode: ArithmeticMode,
}

/// An inequality the experiment checks, with its margin (nonnegative when it holds).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Claim {
    pub name: String,
    pub margin: f64,
    pub tolerance: f64,
    pub holds: bool,
    /// Failing hard claims make the run exit with [`EXIT_ASSERTION`].
    pub hard: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRow {
    pub quantity: String,
    pub arm: String,
    pub index: String,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub quantity: String,
    pub arm: String,
    pub at_r: f64,
    pub at_2r: f64,
    pub relative_change: f64,
    pub within: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    RecurrentLike,
    TransientLike,
    Indeterminate,
}

impl Classification {
    /// `statistic` estimates `P(L ≥ m_top | survival)`.
    pub fn from_statistic(statistic: f64, threshold: f64) -> Self {
        if statistic >= 1.0 - threshold {
            Classification::RecurrentLike
        } else if statistic <= threshold {
            Classification::TransientLike
        } else {
            Classification::Indeterminate
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Classification::RecurrentLike => "recurrent_like",
            Classification::TransientLike => "transient_like",
            Classification::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassRow {
    pub set: String,
    pub arm: String,
    pub class: Classification,
    pub statistic: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub kind: ExperimentKind,
    pub estimates: Vec<EstimateRow>,
    pub claims: Vec<Claim>,
    pub audit: Vec<AuditRow>,
    pub classes: Vec<ClassRow>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(name: &str, kind: ExperimentKind) -> Self {
        ExperimentReport {
            name: name.to_string(),
            kind,
            estimates: vec![],
            claims: vec![],
            audit: vec![],
            classes: vec![],
            notes: vec![],
        }
    }

    pub fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.holds || !c.hard)
    }

    pub fn estimate(&mut self, quantity: &str, arm: &str, index: impl ToString, estimate: Estimate) {
        self.estimates.push(EstimateRow {
            quantity: quantity.to_string(),
            arm: arm.to_string(),
            index: index.to_string(),
            estimate,
        });
    }

    pub fn claim(&mut self, name: impl Into<String>, margin: f64, tolerance: f64, hard: bool) {
        self.claims.push(Claim { name: name.into(), margin, tolerance, holds: margin >= -tolerance, hard });
    }

    /// Looks up an estimate by quantity, arm and index.
    pub fn find(&self, quantity: &str, arm: &str, index: &str) -> Option<&Estimate> {
        self.estimates
            .iter()
            .find(|r| r.quantity == quantity && r.arm == arm && r.index == index)
            .map(|r| &r.estimate)
    }

    pub fn find_claim(&self, name: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| c.name == name)
    }

    /// All audit rows stay within [`AUDIT_TOLERANCE`].
    pub fn audit_passed(&self) -> bool {
        self.audit.iter().all(|a| a.within)
    }
}

pub const CSV_COLUMNS: [&str; 11] =
    ["section", "name", "arm", "index", "value", "se", "n", "reference", "margin", "tolerance", "holds"];

/// `#`-prefixed metadata lines.
pub fn metadata_header(title: &str, resolved: Option<&Resolved>, config: &serde_json::Value) -> Vec<String> {
    let mut lines = vec![format!("# germlab {VERSION}"), format!("# run: {title}")];
    if let Some(r) = resolved {
        lines.push(format!("# seed: {}", r.seed));
        lines.push(format!("# mode: {}", r.mode));
        lines.push(format!("# replicas: {}", r.replicas));
    }
    lines.push(format!("# rng: {RNG_NAME}"));
    lines.push(format!("# config: {config}"));
    lines
}

pub(crate) fn fmt_f(x: f64) -> String {
    format!("{x:e}")
}

/// Writes `#` header lines, then a CSV table.
pub fn write_csv(path: &Path, header: &[String], columns: &[&str], rows: &[Vec<String>]) -> Result<(), LabError> {
    let mut file = File::create(path)?;
    for line in header {
        writeln!(file, "{line}")?;
    }
    let mut w = csv::Writer::from_writer(file);
    w.write_record(columns)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn report_rows(report: &ExperimentReport) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    let e = String::new;
    for r in &report.estimates {
        let est = &r.estimate;
        rows.push(vec![
            "estimate".into(),
            r.quantity.clone(),
            r.arm.clone(),
            r.index.clone(),
            fmt_f(est.mean),
            fmt_f(est.se),
            est.n.to_string(),
            e(),
            e(),
            e(),
            e(),
        ]);
    }
    for c in &report.claims {
        rows.push(vec![
            "claim".into(),
            c.name.clone(),
            e(),
            if c.hard { "hard" } else { "advisory" }.into(),
            e(),
            e(),
            e(),
            e(),
            fmt_f(c.margin),
            fmt_f(c.tolerance),
            c.holds.to_string(),
        ]);
    }
    for a in &report.audit {
        rows.push(vec![
            "audit".into(),
            a.quantity.clone(),
            a.arm.clone(),
            e(),
            fmt_f(a.at_r),
            e(),
            e(),
            fmt_f(a.at_2r),
            fmt_f(a.relative_change),
            fmt_f(AUDIT_TOLERANCE),
            a.within.to_string(),
        ]);
    }
    for c in &report.classes {
        rows.push(vec![
            "class".into(),
            c.set.clone(),
            c.arm.clone(),
            c.class.name().into(),
            fmt_f(c.statistic),
            e(),
            e(),
            fmt_f(c.threshold),
            e(),
            e(),
            e(),
        ]);
    }
    for n in &report.notes {
        rows.push(vec!["note".into(), n.clone(), e(), e(), e(), e(), e(), e(), e(), e(), e()]);
    }
    rows
}

pub fn run_experiment(
    run: &RunConfig,
    cfg: &ExperimentConfig,
    exec: Execution,
) -> Result<ExperimentReport, LabError> {
    let resolved = run.resolve(cfg);
    match cfg.experiment {
        ExperimentKind::Monotonicity => monotonicity_experiment(cfg, &resolved, exec),
        ExperimentKind::Displacement => displacement_experiment(cfg, &resolved, exec),
        ExperimentKind::Intersection => intersection_experiment(cfg, &resolved, exec),
        ExperimentKind::DyadicCover => dyadic_cover_experiment(cfg, &resolved, exec),
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub reports: Vec<ExperimentReport>,
    pub files: Vec<PathBuf>,
    pub exit_code: i32,
}

/// Runs every experiment, writing `<name>.csv` per experiment and `summary.csv`
/// into `out_dir`.
pub fn run(config: &RunConfig, out_dir: &Path, exec: Execution) -> Result<RunOutcome, LabError> {
    std::fs::create_dir_all(out_dir)?;
    let mut names = std::collections::HashSet::new();
    for e in &config.experiments {
        if !names.insert(e.name.as_str()) {
            return Err(LabError::Config(format!("duplicate experiment name `{}`", e.name)));
        }
        if e.name.is_empty() || e.name.contains(['/', '\\']) || e.name == "summary" {
            return Err(LabError::Config(format!("experiment name `{}` is not a valid file stem", e.name)));
        }
    }

    let mut reports = Vec::new();
    let mut files = Vec::new();
    let mut summary = Vec::new();
    for cfg in &config.experiments {
        let report = run_experiment(config, cfg, exec)?;
        let resolved = config.resolve(cfg);
        let echo = serde_json::to_value(cfg).expect("configs serialize");
        let header = metadata_header(&format!("{} ({})", cfg.name, cfg.experiment), Some(&resolved), &echo);
        let path = out_dir.join(format!("{}.csv", cfg.name));
        write_csv(&path, &header, &CSV_COLUMNS, &report_rows(&report))?;
        files.push(path);
        for c in &report.claims {
            summary.push(vec![
                "claim".into(),
                format!("{}/{}", cfg.name, c.name),
                String::new(),
                if c.hard { "hard" } else { "advisory" }.into(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                fmt_f(c.margin),
                fmt_f(c.tolerance),
                c.holds.to_string(),
            ]);
        }
        reports.push(report);
    }

    let mut echo = serde_json::to_value(config).expect("configs serialize");
    if let Some(obj) = echo.as_object_mut() {
        obj.remove("experiments");
        obj.insert(
            "experiments".into(),
            serde_json::Value::Array(config.experiments.iter().map(|e| e.name.clone().into()).collect()),
        );
    }
    let run_resolved = Resolved { seed: config.seed, replicas: config.replicas, mode: config.mode };
    let path = out_dir.join("summary.csv");
    write_csv(&path, &metadata_header("summary", Some(&run_resolved), &echo), &CSV_COLUMNS, &summary)?;
    files.push(path);

    let exit_code = if reports.iter().all(ExperimentReport::passed) { EXIT_OK } else { EXIT_ASSERTION };
    Ok(RunOutcome { reports, files, exit_code })
}

/// Header lines (`#` metadata plus the column line) of a CSV produced by [`run`].
pub fn read_header(path: &Path) -> Result<Vec<String>, LabError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines: Vec<String> = text.lines().take_while(|l| l.starts_with('#')).map(str::to_string).collect();
    if let Some(columns) = text.lines().find(|l| !l.starts_with('#')) {
        lines.push(columns.to_string());
    }
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_errors_name_the_field() {
        let text = r#"{ "experiments": [ { "name": "x", "experiment": "monotonicity",
            "kernel": { "kind": "lattice", "d": 1, "R": 3 },
            "mu": "{0:1/2,2:1/3}", "nu": "{2:1}", "horizon": 3 } ] }"#;
        let err = RunConfig::from_json(text).unwrap_err().to_string();
        assert!(err.contains("experiments[0].mu"), "{err}");
        let err = RunConfig::from_json(r#"{ "sed": 3 }"#).unwrap_err().to_string();
        assert!(err.contains("sed"), "{err}");
    }

    #[test]
    fn overrides_win() {
        let mut cfg = RunConfig::from_json(
            r#"{ "seed": 1, "experiments": [ { "name": "x", "experiment": "monotonicity",
                 "kernel": { "kind": "lattice", "d": 1, "R": 3 }, "mu": "{0:1/4,2:3/4}", "nu": "{2:1}",
                 "horizon": 3, "seed": 9, "replicas": 5 } ] }"#,
        )
        .unwrap();
        assert_eq!(cfg.resolve(&cfg.experiments[0]).seed, 9);
        cfg.apply(&Overrides { seed: Some(4), replicas: None, mode: Some(ArithmeticMode::Exact) });
        let r = cfg.resolve(&cfg.experiments[0]);
        assert_eq!((r.seed, r.replicas, r.mode), (4, 5, ArithmeticMode::Exact));
    }

    #[test]
    fn empty_run_writes_metadata_only() {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&RunConfig::from_json("{}").unwrap(), dir.path(), Execution::Sequential).unwrap();
        assert_eq!(out.exit_code, EXIT_OK);
        assert_eq!(out.files.len(), 1);
        let text = std::fs::read_to_string(&out.files[0]).unwrap();
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body, vec![CSV_COLUMNS.join(",")]);
    }

    #[test]
    fn classification_thresholds() {
        assert_eq!(Classification::from_statistic(0.99, 0.05), Classification::RecurrentLike);
        assert_eq!(Classification::from_statistic(0.01, 0.05), Classification::TransientLike);
        assert_eq!(Classification::from_statistic(0.5, 0.05), Classification::Indeterminate);
    }
}
