//! Deterministic recursions over value fields on a kernel window.
//!
//! * [`laplace_local_time`]: `E_x[t^{L_n(A)}]` through the generating-function
//!   recursion over the first generation.
//! * [`clamped_pair_iteration`]: the operators `I_μ`, `I_ν` that never let values
//!   fall below a germ threshold `α`, iterated from `α^{1(x∈A)}`.
//! * [`pioneer_h_recursion`]: `E_x[α^{E_n(D)}]` where `E_n(D)` counts particles in
//!   `D` with no ancestor in `D`.
//!
//! Mass killed at the window boundary belongs to a particle that never visits
//! anything again, so it contributes the value 1 in every averaging step
//! `PF(x) = Σ_y P(x, y) F(y) + killed(x)`. Killing can therefore only raise
//! `E[t^L]`-type fields; comparisons between two offspring laws always use the
//! same window.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::offspring::OffspringDist;
use crate::orders::{certify_threshold, compare_germ, germ_threshold, GermThreshold, OrderError, Relation};
use crate::rational::{fmt_q, from_f64, Q};
use crate::scalar::{Margin, Scalar};
use crate::statespace::{Kernel, SpaceTimeSet, StateId};

/// Default sup-norm tolerance for declaring the clamped iterations converged.
pub const CONVERGENCE_TOL: f64 = 1e-10;

/// Default tolerance defining `D = {x : F(x) ≤ α + tol}` from the final iterate.
pub const PIONEER_SET_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("argument out of range: {0}")]
    Domain(String),
    #[error("set `{0}` depends on the generation; run the engine on the space-time lift")]
    TimeDependentSet(String),
    #[error(transparent)]
    Order(#[from] OrderError),
}

/// Values on every state of a kernel window, all within `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct ValueField<S> {
    pub values: Vec<S>,
    pub lo: S,
    pub hi: S,
}

impl<S: Scalar> ValueField<S> {
    fn new(values: Vec<S>, lo: S, hi: S) -> Self {
        ValueField { values, lo, hi }
    }

    pub fn get(&self, x: StateId) -> &S {
        &self.values[x]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_distance(&self, other: &ValueField<S>) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.dist(b))
            .fold(0.0, f64::max)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(Scalar::to_f64).collect()
    }

    /// Every value lies in `[lo, hi]`.
    pub fn within_bounds(&self) -> bool {
        self.values
            .iter()
            .all(|v| S::ge(v, &self.lo).holds && S::ge(&self.hi, v).holds)
    }
}

/// Kernel rows converted into the working arithmetic.
struct Prepared<S> {
    rows: Vec<Vec<(StateId, S)>>,
    killed: Vec<S>,
}

impl<S: Scalar> Prepared<S> {
    fn new(kernel: &Kernel) -> Self {
        Prepared {
            rows: (0..kernel.len())
                .map(|s| kernel.transitions(s).iter().map(|(t, p)| (*t, S::from_q(p))).collect())
                .collect(),
            killed: (0..kernel.len()).map(|s| S::from_q(kernel.killed(s))).collect(),
        }
    }

    /// `PF(x)`, with killed mass valued at 1.
    fn average(&self, f: &[S], x: StateId) -> S {
        self.rows[x]
            .iter()
            .fold(self.killed[x].clone(), |acc, (y, p)| acc.add(&p.mul(&f[*y])))
    }
}

struct Pgf<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> Pgf<S> {
    fn new(dist: &OffspringDist) -> Self {
        Pgf { coeffs: dist.pgf().coeffs().iter().map(S::from_q).collect() }
    }

    fn eval(&self, s: &S) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc.mul(s).add(c))
    }
}

fn indicator(kernel: &Kernel, set: &SpaceTimeSet) -> Result<Vec<bool>, EngineError> {
    set.indicator(kernel)
        .ok_or_else(|| EngineError::TimeDependentSet(set.label().to_string()))
}

fn unit_interval(t: &Q, what: &str, open_left: bool) -> Result<(), EngineError> {
    let ok = if open_left { *t > Q::zero() } else { *t >= Q::zero() } && *t <= Q::one();
    if ok {
        Ok(())
    } else {
        Err(EngineError::Domain(format!("{what} = {}", fmt_q(t))))
    }
}

/// `t` on `A`, 1 elsewhere.
fn weight_on_set<S: Scalar>(ind: &[bool], t: &S) -> Vec<S> {
    ind.iter().map(|&a| if a { t.clone() } else { S::one() }).collect()
}

fn local_time_fields<S: Scalar>(
    kernel: &Kernel,
    dist: &OffspringDist,
    ind: &[bool],
    t: &S,
    horizon: u32,
) -> Vec<ValueField<S>> {
    let prep = Prepared::<S>::new(kernel);
    let pgf = Pgf::<S>::new(dist);
    let weight = weight_on_set(ind, t);
    let mut fields = Vec::with_capacity(horizon as usize + 1);
    fields.push(ValueField::new(weight.clone(), S::zero(), S::one()));
    for _ in 0..horizon {
        let prev = &fields.last().unwrap().values;
        // The true values lie in [0, 1]; projecting keeps roundoff from being amplified past 1.
        let next = (0..kernel.len())
            .map(|x| weight[x].mul(&pgf.eval(&prep.average(prev, x))).max(&S::zero()).min(&S::one()))
            .collect();
        fields.push(ValueField::new(next, S::zero(), S::one()));
    }
    fields
}

/// `field_n(x) = E_x[t^{L_n(A)}]` for `n = 0..=horizon`, where `L_n(A)` counts particle
/// visits to `A` in generations `0..=n`.
pub fn laplace_local_time<S: Scalar>(
    kernel: &Kernel,
    dist: &OffspringDist,
    set: &SpaceTimeSet,
    t: &Q,
    horizon: u32,
) -> Result<Vec<ValueField<S>>, EngineError> {
    unit_interval(t, "t", true)?;
    let ind = indicator(kernel, set)?;
    Ok(local_time_fields(kernel, dist, &ind, &S::from_q(t), horizon))
}

/// `P_x(L_n(A) = 0)`: the same recursion evaluated at `t = 0`.
pub fn no_visit_probability<S: Scalar>(
    kernel: &Kernel,
    dist: &OffspringDist,
    set: &SpaceTimeSet,
    horizon: u32,
) -> Result<Vec<ValueField<S>>, EngineError> {
    let ind = indicator(kernel, set)?;
    Ok(local_time_fields(kernel, dist, &ind, &S::zero(), horizon))
}

/// One clamped step: the unclamped values `α^{1(x∈A)} P(PF(x))` and the step
/// itself `[α ∨ raw(x)] ∧ F(x)`.
struct ClampStep<S> {
    raw: Vec<S>,
    next: Vec<S>,
}

fn clamp_step<S: Scalar>(prep: &Prepared<S>, pgf: &Pgf<S>, ind: &[bool], alpha: &S, f: &[S]) -> ClampStep<S> {
    let raw: Vec<S> = (0..f.len())
        .map(|x| {
            let v = pgf.eval(&prep.average(f, x));
            if ind[x] {
                alpha.mul(&v)
            } else {
                v
            }
        })
        .collect();
    let next = raw.iter().zip(f).map(|(v, fx)| alpha.max(v).min(fx)).collect();
    ClampStep { raw, next }
}

#[derive(Debug, Clone)]
pub struct ClampOptions {
    /// Clamp level; defaults to the certified germ threshold.
    pub alpha: Option<Q>,
    /// Keep every `stride`-th iterate (the last one is always kept).
    pub stride: usize,
    pub tolerance: f64,
}

impl Default for ClampOptions {
    fn default() -> Self {
        ClampOptions { alpha: None, stride: 1, tolerance: CONVERGENCE_TOL }
    }
}

/// Tally of inequality checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckTally {
    pub checks: usize,
    pub violations: usize,
    pub undecided: usize,
    /// Smallest margin estimate seen (`+∞` when nothing was checked).
    pub worst: f64,
}

impl Default for CheckTally {
    fn default() -> Self {
        CheckTally { checks: 0, violations: 0, undecided: 0, worst: f64::INFINITY }
    }
}

impl CheckTally {
    pub fn record(&mut self, m: Margin) {
        self.checks += 1;
        self.worst = self.worst.min(m.estimate);
        if m.violated {
            self.violations += 1;
        } else if !m.holds {
            self.undecided += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.undecided == 0
    }

    pub fn merge(&mut self, other: &CheckTally) {
        self.checks += other.checks;
        self.violations += other.violations;
        self.undecided += other.undecided;
        self.worst = self.worst.min(other.worst);
    }
}

#[derive(Debug, Clone)]
pub struct IterationReport<S> {
    /// `(step, field)` pairs at the configured stride, always ending with the last step.
    pub iterates: Vec<(usize, ValueField<S>)>,
    /// Sup-norm change of each step.
    pub deltas: Vec<f64>,
    pub converged: bool,
    /// `‖I F − F‖∞` for the final iterate.
    pub residual: f64,
}

impl<S: Scalar> IterationReport<S> {
    pub fn last(&self) -> &ValueField<S> {
        &self.iterates.last().unwrap().1
    }

    /// Deltas never increase by more than `tol`.
    pub fn deltas_nonincreasing(&self, tol: f64) -> bool {
        self.deltas.windows(2).all(|w| w[1] <= w[0] + tol)
    }
}

#[derive(Debug, Clone)]
pub struct ClampedRun<S> {
    pub f: IterationReport<S>,
    pub g: IterationReport<S>,
    pub alpha: GermThreshold,
    /// `α ≤ I_ν H ≤ I_μ H ≤ H ≤ 1` for `H = F_n` and `H = G_n` at every step.
    pub chain: CheckTally,
    /// `G_n ≤ F_n` at every step.
    pub ordering: CheckTally,
}

impl<S: Scalar> ClampedRun<S> {
    pub fn passed(&self) -> bool {
        self.chain.passed() && self.ordering.passed()
    }
}

fn resolve_alpha(
    mu: &OffspringDist,
    nu: &OffspringDist,
    supplied: Option<&Q>,
) -> Result<GermThreshold, EngineError> {
    let verdict = compare_germ(mu, nu);
    if verdict.relation != Relation::Less {
        return Err(OrderError::NotGermLess(verdict.relation).into());
    }
    match supplied {
        Some(a) if certify_threshold(mu, nu, a) => Ok(GermThreshold { alpha: a.clone(), tight: false, root: 0.0 }),
        Some(a) => Err(OrderError::AlphaInvalid(fmt_q(a)).into()),
        None => Ok(germ_threshold(mu, nu)?),
    }
}

/// A margin that is upgraded to `holds` when an independent sufficient
/// condition is established. Violations are never overridden.
fn or_evidence(m: Margin, evidence: bool) -> Margin {
    if m.violated || m.holds || !evidence {
        m
    } else {
        Margin { holds: true, ..m }
    }
}

/// Records `α ≤ I_ν H ≤ I_μ H ≤ H ≤ 1` at every state and returns which states
/// have `I_ν H ≤ I_μ H` established.
///
/// With enclosures, equal values are undecidable by direct comparison, so each
/// link also accepts a sufficient condition read off the step's ingredients:
/// `[α ∨ v] ∧ H` is at least `α` when `H ≥ α`, and never exceeds `H`;
/// `I_ν H ≤ I_μ H` follows from `raw_ν ≤ raw_μ`, `raw_ν ≤ α` or `raw_μ ≥ H`.
#[allow(clippy::needless_range_loop)]
fn chain_check<S: Scalar>(tally: &mut CheckTally, alpha: &S, nu: &ClampStep<S>, mu: &ClampStep<S>, h: &[S]) -> Vec<bool> {
    let mut nu_below_mu = Vec::with_capacity(h.len());
    for x in 0..h.len() {
        let h_above_alpha = S::ge(&h[x], alpha).holds;
        tally.record(or_evidence(S::ge(&nu.next[x], alpha), h_above_alpha));
        let link = or_evidence(
            S::ge(&mu.next[x], &nu.next[x]),
            S::ge(&mu.raw[x], &nu.raw[x]).holds || S::ge(alpha, &nu.raw[x]).holds || S::ge(&mu.raw[x], &h[x]).holds,
        );
        nu_below_mu.push(link.holds);
        tally.record(link);
        tally.record(or_evidence(S::ge(&h[x], &mu.next[x]), true));
        tally.record(S::ge(&S::one(), &h[x]));
    }
    nu_below_mu
}

fn sup_dist<S: Scalar>(a: &[S], b: &[S]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dist(y)).fold(0.0, f64::max)
}

/// Iterates `F_{n+1} = I_μ F_n` and `G_{n+1} = I_ν G_n` from `α^{1(x∈A)}` for
/// `horizon` steps, checking the operator inequality chain at every step.
pub fn clamped_pair_iteration<S: Scalar>(
    kernel: &Kernel,
    mu: &OffspringDist,
    nu: &OffspringDist,
    set: &SpaceTimeSet,
    horizon: u32,
    opts: &ClampOptions,
) -> Result<ClampedRun<S>, EngineError> {
    let threshold = resolve_alpha(mu, nu, opts.alpha.as_ref())?;
    let ind = indicator(kernel, set)?;
    let alpha = S::from_q(&threshold.alpha);
    let prep = Prepared::<S>::new(kernel);
    let (pmu, pnu) = (Pgf::<S>::new(mu), Pgf::<S>::new(nu));
    let stride = opts.stride.max(1);

    let start = weight_on_set(&ind, &alpha);
    let field = |v: Vec<S>| ValueField::new(v, alpha.clone(), S::one());
    let (mut f, mut g) = (start.clone(), start);
    let mut f_report = IterationReport { iterates: vec![(0, field(f.clone()))], deltas: vec![], converged: false, residual: 0.0 };
    let mut g_report = IterationReport { iterates: vec![(0, field(g.clone()))], deltas: vec![], converged: false, residual: 0.0 };
    let mut chain = CheckTally::default();
    let mut ordering = CheckTally::default();
    let mut ordered_everywhere = true;
    for x in 0..f.len() {
        let m = S::ge(&f[x], &g[x]);
        ordered_everywhere &= m.holds;
        ordering.record(m);
    }

    for step in 1..=horizon as usize {
        let mu_f = clamp_step(&prep, &pmu, &ind, &alpha, &f);
        let nu_f = clamp_step(&prep, &pnu, &ind, &alpha, &f);
        let nu_below_mu = chain_check(&mut chain, &alpha, &nu_f, &mu_f, &f);
        let mu_g = clamp_step(&prep, &pmu, &ind, &alpha, &g);
        let nu_g = clamp_step(&prep, &pnu, &ind, &alpha, &g);
        chain_check(&mut chain, &alpha, &nu_g, &mu_g, &g);

        f_report.deltas.push(sup_dist(&mu_f.next, &f));
        g_report.deltas.push(sup_dist(&nu_g.next, &g));
        f = mu_f.next;
        g = nu_g.next;
        // I_ν is monotone, so G_n ≤ F_n everywhere and I_ν F_n ≤ I_μ F_n at x give
        // G_{n+1}(x) ≤ F_{n+1}(x).
        let inherited = ordered_everywhere;
        ordered_everywhere = true;
        for x in 0..f.len() {
            let m = or_evidence(S::ge(&f[x], &g[x]), inherited && nu_below_mu[x]);
            ordered_everywhere &= m.holds;
            ordering.record(m);
        }
        if step % stride == 0 || step == horizon as usize {
            f_report.iterates.push((step, field(f.clone())));
            g_report.iterates.push((step, field(g.clone())));
        }
    }

    f_report.residual = sup_dist(&clamp_step(&prep, &pmu, &ind, &alpha, &f).next, &f);
    g_report.residual = sup_dist(&clamp_step(&prep, &pnu, &ind, &alpha, &g).next, &g);
    f_report.converged = f_report.deltas.last().is_none_or(|d| *d <= opts.tolerance);
    g_report.converged = g_report.deltas.last().is_none_or(|d| *d <= opts.tolerance);
    Ok(ClampedRun { f: f_report, g: g_report, alpha: threshold, chain, ordering })
}

/// `H_0 = α^{1(x∈D)}`, then `H_{n+1} = α` on `D` and `P_μ(PH_n) ∧ H_n` off `D`.
pub fn pioneer_h_recursion<S: Scalar>(
    kernel: &Kernel,
    mu: &OffspringDist,
    d_set: &SpaceTimeSet,
    alpha: &Q,
    horizon: u32,
) -> Result<Vec<ValueField<S>>, EngineError> {
    if *alpha <= Q::zero() || *alpha >= Q::one() {
        return Err(EngineError::Domain(format!("alpha = {} must lie in (0, 1)", fmt_q(alpha))));
    }
    let ind = indicator(kernel, d_set)?;
    Ok(pioneer_fields(kernel, mu, &ind, &S::from_q(alpha), horizon))
}

fn pioneer_fields<S: Scalar>(
    kernel: &Kernel,
    mu: &OffspringDist,
    ind: &[bool],
    alpha: &S,
    horizon: u32,
) -> Vec<ValueField<S>> {
    let prep = Prepared::<S>::new(kernel);
    let pgf = Pgf::<S>::new(mu);
    let mut fields = vec![ValueField::new(weight_on_set(ind, alpha), alpha.clone(), S::one())];
    for _ in 0..horizon {
        let prev = &fields.last().unwrap().values;
        let next = (0..kernel.len())
            .map(|x| if ind[x] { alpha.clone() } else { pgf.eval(&prep.average(prev, x)).min(&prev[x]) })
            .collect();
        fields.push(ValueField::new(next, alpha.clone(), S::one()));
    }
    fields
}

#[derive(Debug, Clone)]
pub struct GermCheckOptions {
    pub alpha: Option<Q>,
    /// `D = {x : F_∞(x) ≤ α + tol}`; also the slack of the pioneer comparison.
    pub pioneer_tolerance: f64,
    /// Step budget for approximating `F_∞` (iteration stops once a step moves
    /// less than [`CONVERGENCE_TOL`]).
    pub fixed_point_steps: u32,
}

impl Default for GermCheckOptions {
    fn default() -> Self {
        GermCheckOptions { alpha: None, pioneer_tolerance: PIONEER_SET_TOL, fixed_point_steps: 20_000 }
    }
}

/// Smallest margins seen at one state over all generations.
#[derive(Debug, Clone, PartialEq)]
pub struct StateMargins {
    pub label: String,
    /// `G_n − (α ∨ E^ν[α^{L_n}])`.
    pub lower_bound: f64,
    /// `H_n − F_∞`.
    pub pioneer: f64,
    /// `α + (1 − α) P^μ(L_n = 0) − (α ∨ E^ν[α^{L_n}])`.
    pub conclusion: f64,
}

#[derive(Debug, Clone)]
pub struct GermBoundReport {
    pub alpha: GermThreshold,
    pub lower_bound: CheckTally,
    pub pioneer: CheckTally,
    pub conclusion: CheckTally,
    pub pioneer_set_size: usize,
    /// Operator chain and `G_n ≤ F_n` checks of the underlying clamped run.
    pub chain: CheckTally,
    pub ordering: CheckTally,
    /// `F_n` and `G_n` at the horizon.
    pub f_horizon: Vec<f64>,
    pub g_horizon: Vec<f64>,
    /// Steps taken towards `F_∞` and the sup-norm change of the last one.
    pub fixed_point_steps: u32,
    pub fixed_point_delta: f64,
    pub per_state: Vec<StateMargins>,
}

impl GermBoundReport {
    pub fn passed(&self) -> bool {
        self.lower_bound.passed() && self.pioneer.passed() && self.conclusion.passed()
    }
}

/// Checks the computable halves of the germ comparison at every state and every
/// generation up to `horizon`:
///
/// 1. `G_n ≥ α ∨ E^ν[α^{L_n(A)}]`;
/// 2. `F_∞ ≤ H_n + tol`, with `F_∞` the `F` iteration continued until it settles
///    and `D = {F_∞ ≤ α + tol}`;
/// 3. `E^μ[α^{1(L_n(A) > 0)}] ≥ α ∨ E^ν[α^{L_n(A)}]`, the finite-horizon form of the
///    conclusion (the horizon cut is itself a space-time set).
pub fn germ_bound_check<S: Scalar>(
    kernel: &Kernel,
    mu: &OffspringDist,
    nu: &OffspringDist,
    set: &SpaceTimeSet,
    horizon: u32,
    opts: &GermCheckOptions,
) -> Result<GermBoundReport, EngineError> {
    let clamp_opts = ClampOptions { alpha: opts.alpha.clone(), stride: 1, tolerance: CONVERGENCE_TOL };
    let run = clamped_pair_iteration::<S>(kernel, mu, nu, set, horizon, &clamp_opts)?;
    let ind = indicator(kernel, set)?;
    let alpha_q = run.alpha.alpha.clone();
    let alpha = S::from_q(&alpha_q);
    let laplace_nu = local_time_fields(kernel, nu, &ind, &alpha, horizon);
    let avoid_mu = local_time_fields(kernel, mu, &ind, &S::zero(), horizon);
    let one_minus_alpha = S::from_q(&(Q::one() - &alpha_q));

    let n_states = kernel.len();
    let mut per_state: Vec<StateMargins> = (0..n_states)
        .map(|x| StateMargins {
            label: kernel.label(x).to_string(),
            lower_bound: f64::INFINITY,
            pioneer: f64::INFINITY,
            conclusion: f64::INFINITY,
        })
        .collect();

    let mut lower_bound = CheckTally::default();
    let mut conclusion = CheckTally::default();
    // Inductive evidence for (1): if G_n ≥ α ∨ u_n holds everywhere, with
    // u_n = E^ν[α^{L_n}], then monotonicity of the ν-step gives the unclamped part
    // of G_{n+1} at least α ∨ u_{n+1}, and G_n ≥ α ∨ u_n ≥ α ∨ u_{n+1} because L_n
    // is nondecreasing in n. Enclosures cannot separate equal values, and the
    // two sides coincide wherever the clamp is inactive.
    let mut bound_everywhere = false;
    for (n, g) in run.g.iterates.iter().map(|(n, g)| (*n, g)) {
        let rhs: Vec<S> = laplace_nu[n].values.iter().map(|v| alpha.max(v)).collect();
        let inherited = bound_everywhere;
        bound_everywhere = true;
        for x in 0..n_states {
            let m = or_evidence(S::ge(g.get(x), &rhs[x]), inherited);
            bound_everywhere &= m.holds;
            lower_bound.record(m);
            per_state[x].lower_bound = per_state[x].lower_bound.min(m.estimate);
            let lhs = alpha.add(&one_minus_alpha.mul(avoid_mu[n].get(x)));
            let m = S::ge(&lhs, &rhs[x]);
            conclusion.record(m);
            per_state[x].conclusion = per_state[x].conclusion.min(m.estimate);
        }
    }

    let tol_q = from_f64(opts.pioneer_tolerance).unwrap_or_else(Q::zero);
    let tol = S::from_q(&tol_q);
    let cutoff = alpha.add(&tol);
    let prep = Prepared::<S>::new(kernel);
    let pmu = Pgf::<S>::new(mu);
    let mut f_inf = run.f.last().values.clone();
    let mut steps = horizon;
    let mut delta = run.f.deltas.last().copied().unwrap_or(f64::INFINITY);
    while steps < opts.fixed_point_steps.max(horizon) && delta > CONVERGENCE_TOL {
        let next = clamp_step(&prep, &pmu, &ind, &alpha, &f_inf).next;
        delta = sup_dist(&next, &f_inf);
        f_inf = next;
        steps += 1;
    }
    let d_ind: Vec<bool> = f_inf.iter().map(|v| S::ge(&cutoff, v).holds).collect();
    let pioneer_set_size = d_ind.iter().filter(|&&b| b).count();
    let mut pioneer = CheckTally::default();
    if !alpha_q.is_zero() {
        let h = pioneer_fields(kernel, mu, &d_ind, &alpha, horizon);
        for field in &h {
            for x in 0..n_states {
                let m = S::ge(&field.get(x).add(&tol), &f_inf[x]);
                pioneer.record(m);
                per_state[x].pioneer = per_state[x].pioneer.min(m.estimate - opts.pioneer_tolerance);
            }
        }
    }

    Ok(GermBoundReport {
        chain: run.chain,
        ordering: run.ordering,
        f_horizon: run.f.last().to_f64(),
        g_horizon: run.g.last().to_f64(),
        alpha: run.alpha,
        lower_bound,
        pioneer,
        conclusion,
        pioneer_set_size,
        fixed_point_steps: steps,
        fixed_point_delta: delta,
        per_state,
    })
}

/// The state set `{x : mask[x]}` as a space-time set on `kernel` (pairs for lifts).
pub fn set_from_mask(kernel: &Kernel, mask: &[bool]) -> SpaceTimeSet {
    if kernel.is_space_time() {
        let members: Vec<(String, u32)> = (0..kernel.len())
            .filter(|&s| mask[s])
            .map(|s| {
                let (x, m) = kernel.space_time_coords(s);
                (kernel.base().label(x).to_string(), m.unwrap_or(0))
            })
            .collect();
        SpaceTimeSet::custom(kernel, &members).expect("labels come from the kernel")
    } else {
        let ids: Vec<StateId> = (0..kernel.len()).filter(|&s| mask[s]).collect();
        SpaceTimeSet::states(kernel, &ids)
    }
}
