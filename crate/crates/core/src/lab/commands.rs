//! `recurse` and `simulate` subcommands: engine fields and per-replica particle
//! statistics for one configured experiment.

use std::path::Path;
use std::sync::Arc;

use super::{fmt_f, metadata_header, write_csv, ExperimentConfig, LabError, Resolved, RunConfig, EXIT_ASSERTION, EXIT_OK};
use crate::engine::{
    clamped_pair_iteration, germ_bound_check, laplace_local_time, pioneer_h_recursion, ClampOptions, GermCheckOptions,
    ValueField,
};
use crate::orders::germ_threshold;
use crate::parallel::{try_map_replicas, Execution};
use crate::rational::{parse_rational, Q};
use crate::scalar::{ArithmeticMode, Exact, Scalar};
use crate::simulate::{simulate_replica, OffspringSampler};
use crate::statespace::{space_time_lift, Kernel, SpaceTimeSet};

/// Default particle cap of the `simulate` subcommand.
pub const DEFAULT_PARTICLE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineKind {
    Laplace,
    Clamped,
    Pioneer,
    GermCheck,
}

impl std::str::FromStr for EngineKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "laplace" => Ok(EngineKind::Laplace),
            "clamped" => Ok(EngineKind::Clamped),
            "pioneer" => Ok(EngineKind::Pioneer),
            "germ-check" => Ok(EngineKind::GermCheck),
            other => Err(format!("unknown engine `{other}` (expected laplace, clamped, pioneer or germ-check)")),
        }
    }
}

/// The named experiment, or the first one.
pub fn select<'a>(config: &'a RunConfig, name: Option<&str>) -> Result<&'a ExperimentConfig, LabError> {
    match name {
        Some(n) => config
            .experiments
            .iter()
            .find(|e| e.name == n)
            .ok_or_else(|| LabError::Config(format!("no experiment named `{n}`"))),
        None => config.experiments.first().ok_or_else(|| LabError::Config("config has no experiments".into())),
    }
}

/// Kernel and first set of an experiment; time-dependent sets use the lift.
fn engine_inputs(cfg: &ExperimentConfig) -> Result<(Kernel, SpaceTimeSet), LabError> {
    let base = cfg.kernel.build()?;
    let spec = cfg.sets.first().ok_or_else(|| LabError::Config(format!("experiment `{}` has no sets", cfg.name)))?;
    let set = spec.build(&base)?;
    if set.is_time_invariant() {
        Ok((base, set))
    } else {
        let lift = space_time_lift(&base, cfg.horizon);
        let set = spec.build(&lift)?;
        Ok((lift, set))
    }
}

fn field_rows<S: Scalar>(kernel: &Kernel, series: &str, fields: &[(usize, &ValueField<S>)], rows: &mut Vec<Vec<String>>) {
    for (n, f) in fields {
        for x in 0..kernel.len() {
            let v = f.get(x);
            rows.push(vec![
                series.to_string(),
                n.to_string(),
                kernel.label(x).to_string(),
                fmt_f(v.to_f64()),
                v.exact_repr().unwrap_or_default(),
            ]);
        }
    }
}

const FIELD_COLUMNS: [&str; 5] = ["series", "generation", "state", "value", "exact"];

fn recurse_with<S: Scalar>(
    cfg: &ExperimentConfig,
    engine: EngineKind,
    alpha: Option<&Q>,
) -> Result<(Vec<Vec<String>>, bool), LabError> {
    let (kernel, set) = engine_inputs(cfg)?;
    let h = cfg.horizon;
    let mut rows = vec![];
    let mut ok = true;
    match engine {
        EngineKind::Laplace => {
            let t = parse_rational(&cfg.t).map_err(|e| LabError::Config(format!("field `t`: {e}")))?;
            for (series, d) in [("mu", &cfg.mu), ("nu", &cfg.nu)] {
                let fields = laplace_local_time::<S>(&kernel, d, &set, &t, h)?;
                let indexed: Vec<_> = fields.iter().enumerate().collect();
                field_rows(&kernel, series, &indexed, &mut rows);
            }
        }
        EngineKind::Clamped => {
            let opts = ClampOptions { alpha: alpha.cloned(), ..Default::default() };
            let run = clamped_pair_iteration::<S>(&kernel, &cfg.mu, &cfg.nu, &set, h, &opts)?;
            let f: Vec<_> = run.f.iterates.iter().map(|(n, v)| (*n, v)).collect();
            let g: Vec<_> = run.g.iterates.iter().map(|(n, v)| (*n, v)).collect();
            field_rows(&kernel, "F", &f, &mut rows);
            field_rows(&kernel, "G", &g, &mut rows);
            ok = run.passed();
        }
        EngineKind::Pioneer => {
            let alpha = match alpha {
                Some(a) => a.clone(),
                None => germ_threshold(&cfg.mu, &cfg.nu)?.alpha,
            };
            let fields = pioneer_h_recursion::<S>(&kernel, &cfg.mu, &set, &alpha, h)?;
            let indexed: Vec<_> = fields.iter().enumerate().collect();
            field_rows(&kernel, "H", &indexed, &mut rows);
        }
        EngineKind::GermCheck => {
            let opts = GermCheckOptions { alpha: alpha.cloned(), ..Default::default() };
            let rep = germ_bound_check::<S>(&kernel, &cfg.mu, &cfg.nu, &set, h, &opts)?;
            for s in &rep.per_state {
                for (series, m) in [("lower_bound", s.lower_bound), ("pioneer", s.pioneer), ("conclusion", s.conclusion)] {
                    rows.push(vec![series.into(), h.to_string(), s.label.clone(), fmt_f(m), String::new()]);
                }
            }
            ok = rep.passed();
        }
    }
    Ok((rows, ok))
}

/// Writes engine fields (or germ-check margins) for one experiment; returns the exit code.
pub fn recurse(
    config: &RunConfig,
    name: Option<&str>,
    engine: EngineKind,
    alpha: Option<&Q>,
    out: &Path,
) -> Result<i32, LabError> {
    let cfg = select(config, name)?;
    let resolved = config.resolve(cfg);
    let (rows, ok) = match resolved.mode {
        ArithmeticMode::Float => recurse_with::<f64>(cfg, engine, alpha)?,
        ArithmeticMode::Exact => recurse_with::<Exact>(cfg, engine, alpha)?,
    };
    let echo = serde_json::to_value(cfg).expect("configs serialize");
    let header = metadata_header(&format!("{} (recurse {engine:?})", cfg.name), Some(&resolved), &echo);
    write_csv(out, &header, &FIELD_COLUMNS, &rows)?;
    Ok(if ok { EXIT_OK } else { EXIT_ASSERTION })
}

/// Per-replica particle statistics under the first law `mu`.
pub fn simulate(
    config: &RunConfig,
    name: Option<&str>,
    out: &Path,
    exec: Execution,
) -> Result<i32, LabError> {
    let cfg = select(config, name)?;
    let resolved: Resolved = config.resolve(cfg);
    let kernel = Arc::new(cfg.kernel.build()?);
    let sets: Vec<SpaceTimeSet> = cfg.sets.iter().map(|s| s.build(&kernel)).collect::<Result<_, _>>()?;
    let sampler = OffspringSampler::new(&cfg.mu);
    let cap = cfg.cap.map_or(DEFAULT_PARTICLE_CAP, |c| c as usize);
    let h = cfg.horizon;
    let metric = kernel.has_metric();
    let rows = try_map_replicas(resolved.replicas, exec, |r| {
        let t = simulate_replica(&kernel, &sampler, kernel.origin(), h, cap, resolved.seed, r)?;
        let mut row = vec![
            r.to_string(),
            t.extinct_at.map(|n| n.to_string()).unwrap_or_default(),
            t.cap_hit.to_string(),
            t.final_size().to_string(),
        ];
        row.extend(sets.iter().map(|s| t.local_time(s, h).to_string()));
        row.extend(sets.iter().map(|s| t.pioneer_count(s, h).to_string()));
        if metric {
            let m = t.max_displacement(kernel.origin())?;
            let last = m.last().copied().flatten();
            let max = m.iter().flatten().max().copied();
            row.push(last.map(|v| v.to_string()).unwrap_or_default());
            row.push(max.map(|v| v.to_string()).unwrap_or_default());
        } else {
            row.extend([String::new(), String::new()]);
        }
        Ok::<_, LabError>(row)
    })?;
    let mut columns: Vec<String> = ["replica", "extinct_at", "cap_hit", "final_size"].map(String::from).to_vec();
    columns.extend(sets.iter().map(|s| format!("L({})", s.label())));
    columns.extend(sets.iter().map(|s| format!("E({})", s.label())));
    columns.extend(["M_last".to_string(), "M_max".to_string()]);
    let columns: Vec<&str> = columns.iter().map(String::as_str).collect();
    let echo = serde_json::to_value(cfg).expect("configs serialize");
    let header = metadata_header(&format!("{} (simulate)", cfg.name), Some(&resolved), &echo);
    write_csv(out, &header, &columns, &rows)?;
    Ok(EXIT_OK)
}
