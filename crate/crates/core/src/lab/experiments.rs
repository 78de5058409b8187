//! The four experiments.
//!
//! Monte Carlo arms use the occupancy simulator. Replica `r` draws from
//! `Stream::replica(seed, r)` in both arms, so the arms are coupled through common
//! random numbers and identical laws give identical samples; the decision rule
//! still treats the arms as independent, which only widens the band.

use std::sync::Arc;

use super::stats::{dominance_margin, slope, Estimate};
use super::{Classification, ClassRow, AuditRow, ExperimentConfig, ExperimentKind, ExperimentReport, LabError, Resolved, AUDIT_TOLERANCE};
use crate::engine::{germ_bound_check, laplace_local_time, no_visit_probability, CheckTally, GermCheckOptions, CONVERGENCE_TOL};
use crate::occupancy::{simulate_occupancy, OccupancyModel, OccupancyTrajectory, DEFAULT_COUNT_CAP};
use crate::offspring::OffspringDist;
use crate::orders::{compare_germ, compare_pgf, Relation};
use crate::parallel::{try_map_replicas, Execution};
use crate::rational::{parse_rational, Q};
use crate::rng::Stream;
use crate::scalar::{ArithmeticMode, Exact, Scalar, FLOAT_TOL};
use crate::statespace::{space_time_lift, Kernel, KernelSpec, RateFn, SetSpec, SpaceTimeSet};

const ARMS: [&str; 2] = ["mu", "nu"];

fn precondition(cfg: &ExperimentConfig, reason: impl Into<String>) -> LabError {
    LabError::Precondition { experiment: cfg.name.clone(), reason: reason.into() }
}

/// `μ ≤_germ ν` (less or equal) is required by every experiment.
fn require_germ_ordered(cfg: &ExperimentConfig, mu: &OffspringDist, nu: &OffspringDist) -> Result<Relation, LabError> {
    let relation = compare_germ(mu, nu).relation;
    match relation {
        Relation::Less | Relation::Equal => Ok(relation),
        other => Err(precondition(cfg, format!("compare_germ({mu}, {nu}) = {other:?}, expected Less or Equal"))),
    }
}

fn build_sets(kernel: &Kernel, specs: &[SetSpec]) -> Result<Vec<SpaceTimeSet>, LabError> {
    specs.iter().map(|s| Ok(s.build(kernel)?)).collect()
}

fn cap(cfg: &ExperimentConfig) -> u64 {
    cfg.cap.unwrap_or(DEFAULT_COUNT_CAP)
}

/// Runs both laws on every replica.
fn occupancy_arms(
    kernel: &Arc<Kernel>,
    laws: [&OffspringDist; 2],
    cfg: &ExperimentConfig,
    resolved: &Resolved,
    exec: Execution,
) -> Result<Vec<[OccupancyTrajectory; 2]>, LabError> {
    let models = laws.map(|d| OccupancyModel::new(kernel, d));
    let start = kernel.origin();
    let (horizon, cap, seed) = (cfg.horizon, cap(cfg), resolved.seed);
    try_map_replicas(resolved.replicas, exec, |r| {
        let a = simulate_occupancy(&models[0], start, horizon, cap, Stream::replica(seed, r))?;
        let b = simulate_occupancy(&models[1], start, horizon, cap, Stream::replica(seed, r))?;
        Ok::<_, LabError>([a, b])
    })
}

/// Runs not extinct by the horizon, capped ones included.
fn survivors(samples: &[[OccupancyTrajectory; 2]], arm: usize) -> u64 {
    samples.iter().filter(|s| s[arm].extinct_at.is_none()).count() as u64
}

fn report_survival(report: &mut ExperimentReport, samples: &[[OccupancyTrajectory; 2]]) {
    let n = samples.len() as u64;
    for (a, arm) in ARMS.iter().enumerate() {
        report.estimate("survival", arm, "", Estimate::proportion(survivors(samples, a), n));
        let capped = samples.iter().filter(|s| s[a].cap_hit).count() as u64;
        report.estimate("capped", arm, "", Estimate::proportion(capped, n));
    }
}

/// `P(stat ≥ m | survival)` for both arms with the direction claim `ν ≥ μ`.
///
/// A run stopped by the count cap has not died out, so it stays in the
/// conditioning event. Its statistic is only known from below, so it is resolved
/// against the claim: the `ν` arm keeps the partial value and the `μ` arm counts as
/// exceeding every level.
fn level_direction(
    report: &mut ExperimentReport,
    samples: &[[OccupancyTrajectory; 2]],
    quantity: &str,
    label: &str,
    levels: &[u64],
    stat: impl Fn(&OccupancyTrajectory) -> u128,
) -> Vec<Estimate> {
    let values: Vec<[Option<u128>; 2]> = samples
        .iter()
        .map(|s| {
            [0, 1].map(|a| match (&s[a], a) {
                (t, _) if t.extinct_at.is_some() => None,
                (t, 0) if t.cap_hit => Some(u128::MAX),
                (t, _) => Some(stat(t)),
            })
        })
        .collect();
    let mut top = vec![];
    for &m in levels {
        let est = [0, 1].map(|a| {
            let alive: Vec<u128> = values.iter().filter_map(|v| v[a]).collect();
            Estimate::proportion(alive.iter().filter(|&&l| l >= m as u128).count() as u64, alive.len() as u64)
        });
        let index = format!("{label}:m={m}");
        for (a, arm) in ARMS.iter().enumerate() {
            report.estimate(quantity, arm, &index, est[a]);
        }
        report.claim(format!("{quantity}[{index}]: nu >= mu"), dominance_margin(&est[1], &est[0]), 0.0, true);
        top = est.to_vec();
    }
    top
}

/// Engine quantities at the start state together with the claims they certify.
struct EngineArm {
    values: Vec<(String, String, f64)>,
    claims: Vec<(String, f64, f64, bool)>,
}

fn tally_claim(name: &str, tally: &CheckTally, tol: f64) -> (String, f64, f64, bool) {
    let margin = if tally.checks == 0 { 0.0 } else { tally.worst };
    (name.to_string(), margin, tol, tally.passed())
}

fn engine_arm<S: Scalar>(
    kernel: &Kernel,
    set: &SpaceTimeSet,
    mu: &OffspringDist,
    nu: &OffspringDist,
    relation: Relation,
    horizon: u32,
    t: &Q,
) -> Result<EngineArm, LabError> {
    let tol = if S::MODE == ArithmeticMode::Float { FLOAT_TOL } else { 0.0 };
    let start = kernel.origin();
    let h = horizon as usize;
    let lm = laplace_local_time::<S>(kernel, mu, set, t, horizon)?;
    let ln = laplace_local_time::<S>(kernel, nu, set, t, horizon)?;
    let zm = no_visit_probability::<S>(kernel, mu, set, horizon)?;
    let zn = no_visit_probability::<S>(kernel, nu, set, horizon)?;
    let mut values = vec![
        ("laplace".to_string(), "mu".to_string(), lm[h].get(start).to_f64()),
        ("laplace".into(), "nu".into(), ln[h].get(start).to_f64()),
        ("no_visit".into(), "mu".into(), zm[h].get(start).to_f64()),
        ("no_visit".into(), "nu".into(), zn[h].get(start).to_f64()),
    ];
    let mut claims = vec![];
    if matches!(compare_pgf(mu, nu).relation, Relation::Less | Relation::Equal) {
        let mut tally = CheckTally::default();
        for (fm, fnu) in lm.iter().zip(&ln) {
            for x in 0..kernel.len() {
                tally.record(S::ge(fm.get(x), fnu.get(x)));
            }
        }
        claims.push(tally_claim("engine: laplace mu >= nu (pgf-ordered)", &tally, tol));
    }
    if relation == Relation::Less {
        let rep = germ_bound_check::<S>(kernel, mu, nu, set, horizon, &GermCheckOptions::default())?;
        values.push(("clamped_F".into(), "mu".into(), rep.f_horizon[start]));
        values.push(("clamped_G".into(), "nu".into(), rep.g_horizon[start]));
        values.push(("alpha".into(), String::new(), rep.alpha.alpha_f64()));
        claims.push(tally_claim("engine: alpha <= I_nu H <= I_mu H <= H <= 1", &rep.chain, tol));
        claims.push(tally_claim("engine: G_n <= F_n", &rep.ordering, tol));
        claims.push(tally_claim("engine: G_n >= alpha v E^nu[alpha^L_n]", &rep.lower_bound, tol));
        claims.push(tally_claim("engine: F_inf <= H_n", &rep.pioneer, tol));
        claims.push(tally_claim("engine: alpha + (1-alpha) P^mu(L_n=0) >= alpha v E^nu[alpha^L_n]", &rep.conclusion, tol));
        claims.push((
            "engine: F iteration settled".into(),
            CONVERGENCE_TOL - rep.fixed_point_delta,
            0.0,
            rep.fixed_point_delta <= CONVERGENCE_TOL,
        ));
    }
    Ok(EngineArm { values, claims })
}

#[allow(clippy::too_many_arguments)]
fn engine_arm_for(
    mode: ArithmeticMode,
    kernel: &Kernel,
    set: &SpaceTimeSet,
    mu: &OffspringDist,
    nu: &OffspringDist,
    relation: Relation,
    horizon: u32,
    t: &Q,
) -> Result<EngineArm, LabError> {
    match mode {
        ArithmeticMode::Float => engine_arm::<f64>(kernel, set, mu, nu, relation, horizon, t),
        ArithmeticMode::Exact => engine_arm::<Exact>(kernel, set, mu, nu, relation, horizon, t),
    }
}

/// Engine kernel and set: time-dependent sets run on the space-time lift.
fn engine_setup(kernel: &Kernel, spec: &SetSpec, horizon: u32) -> Result<(Kernel, SpaceTimeSet), LabError> {
    let set = spec.build(kernel)?;
    if set.is_time_invariant() {
        Ok((kernel.clone(), set))
    } else {
        let lift = space_time_lift(kernel, horizon);
        let set = spec.build(&lift)?;
        Ok((lift, set))
    }
}

fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Monotonicity of hitting behaviour along the germ order.
pub fn monotonicity_experiment(
    cfg: &ExperimentConfig,
    resolved: &Resolved,
    exec: Execution,
) -> Result<ExperimentReport, LabError> {
    let (mu, nu) = (&cfg.mu, &cfg.nu);
    let relation = require_germ_ordered(cfg, mu, nu)?;
    for d in [mu, nu] {
        if !d.is_supercritical() {
            return Err(precondition(cfg, format!("{d} is not supercritical")));
        }
    }
    let t = parse_rational(&cfg.t).map_err(|e| LabError::Config(format!("field `t`: {e}")))?;
    let kernel = Arc::new(cfg.kernel.build()?);
    let sets = build_sets(&kernel, &cfg.sets)?;
    let mut report = ExperimentReport::new(&cfg.name, ExperimentKind::Monotonicity);
    report.notes.push(format!("compare_germ(mu, nu) = {relation:?}"));
    if relation == Relation::Equal {
        report.notes.push("identical germs: clamped iteration skipped".into());
    }

    // Engine arm, with the doubling audit.
    let doubled = match cfg.kernel {
        KernelSpec::Explicit { .. } => None,
        _ if cfg.audit => Some(cfg.kernel.scaled(2).build()?),
        _ => None,
    };
    for (spec, set) in cfg.sets.iter().zip(&sets) {
        let label = set.label().to_string();
        let (k, s) = engine_setup(&kernel, spec, cfg.horizon)?;
        let arm = engine_arm_for(resolved.mode, &k, &s, mu, nu, relation, cfg.horizon, &t)?;
        for (q, a, v) in &arm.values {
            report.estimate(q, a, &label, Estimate::exact(*v));
        }
        for (name, margin, tol, holds) in &arm.claims {
            report.claims.push(super::Claim {
                name: format!("{name} [{label}]"),
                margin: *margin,
                tolerance: *tol,
                holds: *holds,
                hard: !name.ends_with("settled"),
            });
        }
        if let Some(big) = &doubled {
            let (k2, s2) = engine_setup(big, spec, cfg.horizon)?;
            let arm2 = engine_arm_for(resolved.mode, &k2, &s2, mu, nu, relation, cfg.horizon, &t)?;
            for ((q, a, v), (_, _, v2)) in arm.values.iter().zip(&arm2.values) {
                let rel = relative_change(*v, *v2);
                report.audit.push(AuditRow {
                    quantity: format!("{q} [{label}]"),
                    arm: a.clone(),
                    at_r: *v,
                    at_2r: *v2,
                    relative_change: rel,
                    within: rel <= AUDIT_TOLERANCE,
                });
            }
        }
    }

    // Monte Carlo arm.
    let samples = occupancy_arms(&kernel, [mu, nu], cfg, resolved, exec)?;
    report_survival(&mut report, &samples);
    let horizon = cfg.horizon;
    for set in &sets {
        let label = set.label().to_string();
        let top = level_direction(&mut report, &samples, "hits_given_survival", &label, &cfg.levels, |tr| {
            tr.local_time(set, horizon)
        });
        for (a, arm) in ARMS.iter().enumerate() {
            if let Some(est) = top.get(a) {
                report.classes.push(ClassRow {
                    set: label.clone(),
                    arm: arm.to_string(),
                    class: Classification::from_statistic(est.mean, cfg.classify_threshold),
                    statistic: est.mean,
                    threshold: cfg.classify_threshold,
                });
            }
        }
    }
    Ok(report)
}

/// Maximal displacement `M_n` against a growth profile `f(n)`.
pub fn displacement_experiment(
    cfg: &ExperimentConfig,
    resolved: &Resolved,
    exec: Execution,
) -> Result<ExperimentReport, LabError> {
    let relation = require_germ_ordered(cfg, &cfg.mu, &cfg.nu)?;
    let kernel = Arc::new(cfg.kernel.build()?);
    if !kernel.has_metric() {
        return Err(crate::statespace::KernelError::MetricUnavailable(kernel.name().to_string()).into());
    }
    let sets = build_sets(&kernel, &cfg.sets)?;
    let rate = cfg
        .sets
        .iter()
        .find_map(|s| match s {
            SetSpec::Displacement { rate, .. } => Some(*rate),
            _ => None,
        })
        .unwrap_or(RateFn::Linear);
    let mut report = ExperimentReport::new(&cfg.name, ExperimentKind::Displacement);
    report.notes.push(format!("compare_germ(mu, nu) = {relation:?}; profile f = {rate:?}"));

    let samples = occupancy_arms(&kernel, [&cfg.mu, &cfg.nu], cfg, resolved, exec)?;
    report_survival(&mut report, &samples);
    let origin = kernel.origin();
    let h = cfg.horizon;
    let window: Vec<u32> = (h.div_ceil(2)..=h).filter(|&n| n >= 1 && rate.eval(n) > 0.0).collect();

    let mut worst_speed = i64::MIN;
    let mut ratios = [vec![], vec![]];
    let mut lower = [vec![], vec![]];
    let mut upper = [vec![], vec![]];
    for s in &samples {
        for a in 0..2 {
            let m = s[a].max_displacement(origin)?;
            for (n, d) in m.iter().enumerate() {
                if let Some(d) = d {
                    worst_speed = worst_speed.max(*d as i64 - n as i64);
                }
            }
            if !s[a].survived() || window.is_empty() {
                continue;
            }
            let r: Vec<f64> = window.iter().map(|&n| m[n as usize].unwrap_or(0) as f64 / rate.eval(n)).collect();
            ratios[a].push(*r.last().unwrap());
            lower[a].push(r.iter().cloned().fold(f64::INFINITY, f64::min));
            upper[a].push(r.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        }
    }
    let est = |xs: &[Vec<f64>; 2]| [Estimate::from_samples(&xs[0]), Estimate::from_samples(&xs[1])];
    let (r, lo, hi) = (est(&ratios), est(&lower), est(&upper));
    for (a, arm) in ARMS.iter().enumerate() {
        report.estimate("M_h/f(h)", arm, h, r[a]);
        report.estimate("liminf_surrogate", arm, h, lo[a]);
        report.estimate("limsup_surrogate", arm, h, hi[a]);
    }
    report.claim("M_h/f(h): nu >= mu", dominance_margin(&r[1], &r[0]), 0.0, true);
    report.claim("speed bound M_n <= n", -(worst_speed.max(0) as f64), 0.0, true);
    for set in &sets {
        level_direction(&mut report, &samples, "hits_given_survival", set.label(), &[1], |tr| tr.local_time(set, h));
    }
    Ok(report)
}

fn common_states(a: &OccupancyTrajectory, b: &OccupancyTrajectory) -> u64 {
    let (va, vb) = (a.visited(), b.visited());
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < va.len() && j < vb.len() {
        match va[i].cmp(&vb[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// States visited by two independent processes.
pub fn intersection_experiment(
    cfg: &ExperimentConfig,
    resolved: &Resolved,
    exec: Execution,
) -> Result<ExperimentReport, LabError> {
    let (Some(mu2), Some(nu2)) = (&cfg.mu2, &cfg.nu2) else {
        return Err(LabError::Config(format!("experiment `{}` needs fields `mu2` and `nu2`", cfg.name)));
    };
    let r1 = require_germ_ordered(cfg, &cfg.mu, &cfg.nu)?;
    let r2 = require_germ_ordered(cfg, mu2, nu2)?;
    let kernel = Arc::new(cfg.kernel.build()?);
    let mut report = ExperimentReport::new(&cfg.name, ExperimentKind::Intersection);
    report.notes.push(format!("compare_germ: first pair {r1:?}, second pair {r2:?}"));

    let laws = [[&cfg.mu, mu2], [&cfg.nu, nu2]];
    let models = laws.map(|pair| pair.map(|d| OccupancyModel::new(&kernel, d)));
    let (start, h, cap, seed) = (kernel.origin(), cfg.horizon, cap(cfg), resolved.seed);
    // Per replica and arm: (common states, both alive at the horizon).
    let samples: Vec<[(u64, bool); 2]> = try_map_replicas(resolved.replicas, exec, |r| {
        let root = Stream::replica(seed, r);
        let mut out = [(0, false); 2];
        for (a, pair) in models.iter().enumerate() {
            let p = simulate_occupancy(&pair[0], start, h, cap, root.child(0))?;
            let q = simulate_occupancy(&pair[1], start, h, cap, root.child(1))?;
            out[a] = (common_states(&p, &q), p.survived() && q.survived());
        }
        Ok::<_, LabError>(out)
    })?;

    let mut given = [Estimate::exact(0.0); 2];
    for (a, arm) in ARMS.iter().enumerate() {
        let all: Vec<f64> = samples.iter().map(|s| s[a].0 as f64).collect();
        let alive: Vec<f64> = samples.iter().filter(|s| s[a].1).map(|s| s[a].0 as f64).collect();
        report.estimate("common_states", arm, "", Estimate::from_samples(&all));
        given[a] = Estimate::from_samples(&alive);
        report.estimate("common_states_given_survival", arm, "", given[a]);
        report.estimate(
            "both_survive",
            arm,
            "",
            Estimate::proportion(alive.len() as u64, samples.len() as u64),
        );
    }
    report.claim("common_states_given_survival: nu >= mu", dominance_margin(&given[1], &given[0]), 0.0, true);
    for &m in cfg.levels.iter().filter(|&&m| m as usize <= kernel.len()) {
        let est = [0, 1].map(|a| {
            let alive: Vec<u64> = samples.iter().filter(|s| s[a].1).map(|s| s[a].0).collect();
            Estimate::proportion(alive.iter().filter(|&&c| c >= m).count() as u64, alive.len() as u64)
        });
        for (a, arm) in ARMS.iter().enumerate() {
            report.estimate("common_at_least", arm, m, est[a]);
        }
        report.claim(format!("common_at_least[m={m}]: nu >= mu"), dominance_margin(&est[1], &est[0]), 0.0, true);
    }
    Ok(report)
}

/// Binary cells (resolution `K − 1`) of the depth-`K` vertices an occupancy
/// trajectory visited, ascending and distinct.
pub fn boundary_cells(tr: &OccupancyTrajectory) -> Vec<u32> {
    let kernel = &tr.kernel;
    let depth = kernel.tree_depth().unwrap_or(0);
    let mut cells: Vec<u32> = tr
        .visited()
        .into_iter()
        .filter(|&s| kernel.depth_of(s) == Some(depth))
        .filter_map(|s| kernel.boundary_digits(s))
        .map(|d| d.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32))
        .collect();
    cells.dedup();
    cells.sort_unstable();
    cells.dedup();
    cells
}

/// Least-squares slope of `log2 N_k` in `k = 1..bits`, where `N_k` counts distinct
/// `k`-bit prefixes of `cells`; 0 when fewer than two levels are occupied.
pub fn box_counting_dimension(cells: &[u32], bits: u32) -> f64 {
    let mut xs = vec![];
    let mut ys = vec![];
    for k in 1..=bits {
        let mut prefixes: Vec<u32> = cells.iter().map(|c| c >> (bits - k)).collect();
        prefixes.dedup();
        if !prefixes.is_empty() {
            xs.push(k as f64);
            ys.push((prefixes.len() as f64).log2());
        }
    }
    slope(&xs, &ys).unwrap_or(0.0)
}

/// Random dyadic cubes: level `k` keeps each of its `2^k` cubes with probability
/// `2^{-αk}`.
pub fn sample_cubes(bits: u32, alpha: f64, stream: &mut Stream) -> Vec<Vec<u32>> {
    (1..=bits)
        .map(|k| {
            let p = (-alpha * k as f64).exp2();
            (0..1u32 << k).filter(|_| stream.uniform() < p).collect()
        })
        .collect()
}

/// Levels `k` at which some cube of `cubes[k-1]`, enlarged by a factor 2 about its
/// centre, meets a visited cell.
pub fn levels_hit(cells: &[u32], cubes: &[Vec<u32>], bits: u32) -> u32 {
    let n = 1i64 << bits;
    let mut prefix = vec![0u32; n as usize + 1];
    for &c in cells {
        prefix[c as usize + 1] = 1;
    }
    for i in 0..n as usize {
        prefix[i + 1] += prefix[i];
    }
    let mut hit = 0;
    for (i, level) in cubes.iter().enumerate() {
        let k = i as u32 + 1;
        let s = 1i64 << (bits - k);
        // Cell v = [v, v + 1) meets [(j − 1/2)s, (j + 3/2)s] iff 2v > (2j − 1)s − 2
        // and 2v < (2j + 3)s.
        let any = level.iter().any(|&j| {
            let j = j as i64;
            let lo = (((2 * j - 1) * s - 2).div_euclid(2) + 1).max(0);
            let hi = ((((2 * j + 3) * s) - 1).div_euclid(2)).min(n - 1);
            lo <= hi && prefix[hi as usize + 1] > prefix[lo as usize]
        });
        hit += any as u32;
    }
    hit
}

/// Limit-set surrogates on the binary tree's boundary.
pub fn dyadic_cover_experiment(
    cfg: &ExperimentConfig,
    resolved: &Resolved,
    exec: Execution,
) -> Result<ExperimentReport, LabError> {
    let relation = require_germ_ordered(cfg, &cfg.mu, &cfg.nu)?;
    let kernel = Arc::new(cfg.kernel.build()?);
    let depth = match (kernel.tree_depth(), kernel.boundary_digits(kernel.origin())) {
        (Some(d), Some(_)) => d,
        _ => return Err(precondition(cfg, format!("EmbeddingUnavailable: {} has no binary boundary", kernel.name()))),
    };
    if !(2..=16).contains(&depth) {
        return Err(LabError::Config(format!("dyadic depth K = {depth} must lie in 2..=16")));
    }
    if cfg.dyadic_alpha.is_nan() || cfg.dyadic_alpha < 0.0 {
        return Err(LabError::Config("field `dyadic_alpha` must be nonnegative".into()));
    }
    let bits = depth - 1;
    let mut report = ExperimentReport::new(&cfg.name, ExperimentKind::DyadicCover);
    report.notes.push(format!(
        "compare_germ(mu, nu) = {relation:?}; K = {depth}; alpha = {}; expected cubes per level 2^(k(1-alpha))",
        cfg.dyadic_alpha
    ));

    let models = [&cfg.mu, &cfg.nu].map(|d| OccupancyModel::new(&kernel, d));
    let (start, h, cap, seed) = (kernel.origin(), cfg.horizon, cap(cfg), resolved.seed);
    // Per replica and arm: (dimension surrogate, levels hit, alive at horizon).
    let samples: Vec<[(f64, u32, bool); 2]> = try_map_replicas(resolved.replicas, exec, |r| {
        let root = Stream::replica(seed, r);
        let cubes = sample_cubes(bits, cfg.dyadic_alpha, &mut root.child(2));
        let mut out = [(0.0, 0, false); 2];
        for (a, m) in models.iter().enumerate() {
            let tr = simulate_occupancy(m, start, h, cap, root)?;
            let cells = boundary_cells(&tr);
            out[a] = (box_counting_dimension(&cells, bits), levels_hit(&cells, &cubes, bits), tr.survived());
        }
        Ok::<_, LabError>(out)
    })?;

    let mut hits = [Estimate::exact(0.0); 2];
    for (a, arm) in ARMS.iter().enumerate() {
        let dims: Vec<f64> = samples.iter().map(|s| s[a].0).collect();
        let dims_alive: Vec<f64> = samples.iter().filter(|s| s[a].2).map(|s| s[a].0).collect();
        let h: Vec<f64> = samples.iter().map(|s| s[a].1 as f64).collect();
        report.estimate("box_dimension", arm, depth, Estimate::from_samples(&dims));
        report.estimate("box_dimension_given_survival", arm, depth, Estimate::from_samples(&dims_alive));
        hits[a] = Estimate::from_samples(&h);
        report.estimate("levels_hit", arm, depth, hits[a]);
    }
    report.claim("levels_hit: nu >= mu", dominance_margin(&hits[1], &hits[0]), 0.0, true);
    Ok(report)
}
