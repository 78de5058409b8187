//! Transition kernels on finite windows of countable state spaces, the
//! space-time lift, and space-time sets.
//!
//! A kernel only ever describes the states inside its window. Mass that would
//! leave the window is either killed (recorded per state as `killed`) or
//! reflected back inside, depending on the [`Boundary`] policy.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{fmt_q, parse_rational, to_f64, ParseRationalError, Q};

pub type StateId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("row of state `{state}` sums to {sum}, expected 1")]
    NonStochasticRow { state: String, sum: String },
    #[error("invalid kernel parameters: {0}")]
    InvalidParameters(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("transition probability for `{state}`: {source}")]
    Probability { state: String, source: ParseRationalError },
    #[error("kernel `{0}` carries no graph metric")]
    MetricUnavailable(String),
    #[error("set `{0}` is not defined on this kernel: {1}")]
    UnsupportedSet(String, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Mass leaving the window is deleted.
    #[default]
    #[serde(alias = "killing")]
    Kill,
    /// Moves that would leave the window are redirected to the mirror neighbour.
    #[serde(alias = "reflecting")]
    Reflect,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Lattice { dim: usize, radius: i32, coords: Vec<Vec<i32>> },
    /// Ball in the (b+1)-regular tree; `paths[v]` lists the child indices from the root.
    Tree { branching: u32, depth: u32, paths: Vec<Vec<u8>> },
    Explicit { distances: Option<Vec<Vec<u32>>> },
    SpaceTime { base: Arc<Kernel>, horizon: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    name: String,
    labels: Vec<String>,
    rows: Vec<Vec<(StateId, Q)>>,
    killed: Vec<Q>,
    /// Cumulative probabilities for sampling, in the same order as `rows`.
    cumulative: Vec<Vec<(StateId, f64)>>,
    origin: StateId,
    boundary: Boundary,
    geometry: Geometry,
}

impl Kernel {
    fn assemble(
        name: String,
        labels: Vec<String>,
        rows: Vec<Vec<(StateId, Q)>>,
        origin: StateId,
        boundary: Boundary,
        geometry: Geometry,
    ) -> Kernel {
        let killed = rows
            .iter()
            .map(|r| Q::one() - r.iter().map(|(_, p)| p).sum::<Q>())
            .collect();
        let cumulative = rows
            .iter()
            .map(|r| {
                let mut acc = Q::zero();
                r.iter()
                    .map(|(s, p)| {
                        acc += p;
                        (*s, to_f64(&acc))
                    })
                    .collect()
            })
            .collect();
        Kernel { name, labels, rows, killed, cumulative, origin, boundary, geometry }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, s: StateId) -> &str {
        &self.labels[s]
    }

    pub fn state_by_label(&self, label: &str) -> Option<StateId> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn origin(&self) -> StateId {
        self.origin
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    /// Outgoing transitions inside the window; always the same list for a state.
    pub fn transitions(&self, s: StateId) -> &[(StateId, Q)] {
        &self.rows[s]
    }

    /// Mass of `s` that leaves the window under the killing policy.
    pub fn killed(&self, s: StateId) -> &Q {
        &self.killed[s]
    }

    /// Next state for a uniform draw `u ∈ [0, 1)`, or `None` when the particle is killed.
    pub fn step(&self, s: StateId, u: f64) -> Option<StateId> {
        self.cumulative[s].iter().find(|(_, c)| u < *c).map(|(t, _)| *t)
    }

    /// Checks that every row, including its killed mass, sums exactly to one and
    /// that all probabilities are nonnegative.
    pub fn audit(&self) -> Result<(), KernelError> {
        for s in 0..self.len() {
            let sum: Q = self.rows[s].iter().map(|(_, p)| p).sum::<Q>() + &self.killed[s];
            let negative = self.rows[s].iter().any(|(_, p)| *p < Q::zero()) || self.killed[s] < Q::zero();
            if !sum.is_one() || negative {
                return Err(KernelError::NonStochasticRow { state: self.labels[s].clone(), sum: fmt_q(&sum) });
            }
        }
        Ok(())
    }

    /// For a lifted kernel, the underlying base state and generation of `s`.
    pub fn space_time_coords(&self, s: StateId) -> (StateId, Option<u32>) {
        match &self.geometry {
            Geometry::SpaceTime { base, .. } => (s % base.len(), Some((s / base.len()) as u32)),
            _ => (s, None),
        }
    }

    /// The kernel whose states the space-time coordinates refer to.
    pub fn base(&self) -> &Kernel {
        match &self.geometry {
            Geometry::SpaceTime { base, .. } => base,
            _ => self,
        }
    }

    pub fn is_space_time(&self) -> bool {
        matches!(self.geometry, Geometry::SpaceTime { .. })
    }

    /// Graph distance between two states (space-time states use their base coordinates).
    pub fn distance(&self, a: StateId, b: StateId) -> Result<u32, KernelError> {
        match &self.geometry {
            Geometry::Lattice { coords, .. } => {
                Ok(coords[a].iter().zip(&coords[b]).map(|(x, y)| x.abs_diff(*y)).sum())
            }
            Geometry::Tree { paths, .. } => {
                let (pa, pb) = (&paths[a], &paths[b]);
                let common = pa.iter().zip(pb).take_while(|(x, y)| x == y).count();
                Ok((pa.len() - common + pb.len() - common) as u32)
            }
            Geometry::Explicit { distances: Some(d) } => Ok(d[a][b]),
            Geometry::Explicit { distances: None } => Err(KernelError::MetricUnavailable(self.name.clone())),
            Geometry::SpaceTime { base, .. } => base.distance(a % base.len(), b % base.len()),
        }
    }

    pub fn has_metric(&self) -> bool {
        match &self.geometry {
            Geometry::Explicit { distances } => distances.is_some(),
            Geometry::SpaceTime { base, .. } => base.has_metric(),
            _ => true,
        }
    }

    /// First lattice coordinate, or depth for tree vertices.
    pub fn first_coordinate(&self, s: StateId) -> Option<i64> {
        match &self.geometry {
            Geometry::Lattice { coords, .. } => Some(coords[s][0] as i64),
            Geometry::Tree { paths, .. } => Some(paths[s].len() as i64),
            Geometry::Explicit { .. } => None,
            Geometry::SpaceTime { base, .. } => base.first_coordinate(s % base.len()),
        }
    }

    /// Binary boundary digits of a vertex of the 3-regular tree: the child choices
    /// after the first step from the root. `None` for other kernels.
    pub fn boundary_digits(&self, s: StateId) -> Option<&[u8]> {
        match &self.geometry {
            Geometry::Tree { branching: 2, paths, .. } => Some(paths[s].get(1..).unwrap_or(&[])),
            _ => None,
        }
    }

    pub fn tree_depth(&self) -> Option<u32> {
        match &self.geometry {
            Geometry::Tree { depth, .. } => Some(*depth),
            _ => None,
        }
    }

    pub fn depth_of(&self, s: StateId) -> Option<u32> {
        match &self.geometry {
            Geometry::Tree { paths, .. } => Some(paths[s].len() as u32),
            _ => None,
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} states)", self.name, self.len())
    }
}

/// Simple random walk on `Z^d` restricted to the sup-norm ball of radius `radius`.
pub fn build_lattice(dim: usize, radius: i32, boundary: Boundary) -> Result<Kernel, KernelError> {
    if !(1..=3).contains(&dim) || radius < 1 {
        return Err(KernelError::InvalidParameters(format!("lattice d={dim}, R={radius}")));
    }
    let side = (2 * radius + 1) as usize;
    let n = side.pow(dim as u32);
    let coords: Vec<Vec<i32>> = (0..n)
        .map(|mut id| {
            (0..dim)
                .map(|_| {
                    let c = (id % side) as i32 - radius;
                    id /= side;
                    c
                })
                .collect()
        })
        .collect();
    let index = |c: &[i32]| -> usize {
        c.iter().rev().fold(0usize, |acc, &x| acc * side + (x + radius) as usize)
    };
    let step = Q::new(1.into(), ((2 * dim) as i64).into());
    let rows = coords
        .iter()
        .map(|c| {
            let mut row: Vec<(StateId, Q)> = Vec::with_capacity(2 * dim);
            for axis in 0..dim {
                for delta in [-1, 1] {
                    let mut next = c.clone();
                    next[axis] += delta;
                    if next[axis].abs() > radius {
                        match boundary {
                            Boundary::Kill => continue,
                            Boundary::Reflect => next[axis] = c[axis] - delta,
                        }
                    }
                    push_merged(&mut row, index(&next), step.clone());
                }
            }
            row
        })
        .collect();
    let labels = coords
        .iter()
        .map(|c| match c.as_slice() {
            [x] => x.to_string(),
            _ => format!("({})", c.iter().map(i32::to_string).collect::<Vec<_>>().join(",")),
        })
        .collect();
    let origin = index(&vec![0; dim]);
    Ok(Kernel::assemble(
        format!("lattice(d={dim},R={radius},{boundary:?})"),
        labels,
        rows,
        origin,
        boundary,
        Geometry::Lattice { dim, radius, coords },
    ))
}

fn push_merged(row: &mut Vec<(StateId, Q)>, target: StateId, p: Q) {
    match row.iter_mut().find(|(t, _)| *t == target) {
        Some((_, q)) => *q += p,
        None => row.push((target, p)),
    }
}

/// Simple random walk on the ball of radius `depth` in the `(b+1)`-regular tree.
pub fn build_tree(branching: u32, depth: u32, boundary: Boundary) -> Result<Kernel, KernelError> {
    if branching < 2 || depth < 1 {
        return Err(KernelError::InvalidParameters(format!("tree b={branching}, R={depth}")));
    }
    let mut paths: Vec<Vec<u8>> = vec![Vec::new()];
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        if paths[v].len() as u32 == depth {
            continue;
        }
        let k = if v == 0 { branching + 1 } else { branching };
        for c in 0..k {
            let id = paths.len();
            let mut p = paths[v].clone();
            p.push(c as u8);
            paths.push(p);
            parent.push(Some(v));
            children.push(Vec::new());
            children[v].push(id);
            queue.push_back(id);
        }
    }
    let p = Q::new(1.into(), (branching as i64 + 1).into());
    let rows = (0..paths.len())
        .map(|v| {
            let mut row = Vec::new();
            if let Some(u) = parent[v] {
                row.push((u, p.clone()));
            }
            for &c in &children[v] {
                row.push((c, p.clone()));
            }
            if paths[v].len() as u32 == depth && boundary == Boundary::Reflect {
                // All outward moves bounce back to the parent.
                row = vec![(parent[v].unwrap(), Q::one())];
            }
            row
        })
        .collect();
    let labels = paths
        .iter()
        .map(|p| {
            if p.is_empty() {
                "o".to_string()
            } else {
                p.iter().map(u8::to_string).collect::<Vec<_>>().join(".")
            }
        })
        .collect();
    Ok(Kernel::assemble(
        format!("tree(b={branching},R={depth},{boundary:?})"),
        labels,
        rows,
        0,
        boundary,
        Geometry::Tree { branching, depth, paths },
    ))
}

/// A kernel given row by row. Transitions to states not listed are killed, but
/// every listed row must be stochastic.
pub fn build_explicit(
    table: &[(String, Vec<(String, Q)>)],
    graph_metric: bool,
) -> Result<Kernel, KernelError> {
    if table.is_empty() {
        return Err(KernelError::InvalidParameters("explicit kernel with no states".into()));
    }
    let mut index = HashMap::new();
    for (i, (s, _)) in table.iter().enumerate() {
        if index.insert(s.clone(), i).is_some() {
            return Err(KernelError::DuplicateState(s.clone()));
        }
    }
    let mut rows = Vec::with_capacity(table.len());
    for (s, row) in table {
        let sum: Q = row.iter().map(|(_, p)| p).sum();
        if !sum.is_one() || row.iter().any(|(_, p)| *p < Q::zero()) {
            return Err(KernelError::NonStochasticRow { state: s.clone(), sum: fmt_q(&sum) });
        }
        let mut r = Vec::new();
        for (t, p) in row {
            if let Some(&j) = index.get(t) {
                if !p.is_zero() {
                    push_merged(&mut r, j, p.clone());
                }
            }
        }
        rows.push(r);
    }
    let distances = graph_metric.then(|| bfs_distances(&rows));
    let labels = table.iter().map(|(s, _)| s.clone()).collect();
    Ok(Kernel::assemble(
        format!("explicit({} states)", table.len()),
        labels,
        rows,
        0,
        Boundary::Kill,
        Geometry::Explicit { distances },
    ))
}

fn bfs_distances(rows: &[Vec<(StateId, Q)>]) -> Vec<Vec<u32>> {
    // Undirected hop distance over the support of the kernel.
    let n = rows.len();
    let mut adj = vec![Vec::new(); n];
    for (a, r) in rows.iter().enumerate() {
        for (b, _) in r {
            adj[a].push(*b);
            adj[*b].push(a);
        }
    }
    (0..n)
        .map(|src| {
            let mut dist = vec![u32::MAX; n];
            dist[src] = 0;
            let mut q = VecDeque::from([src]);
            while let Some(v) = q.pop_front() {
                for &w in &adj[v] {
                    if dist[w] == u32::MAX {
                        dist[w] = dist[v] + 1;
                        q.push_back(w);
                    }
                }
            }
            dist
        })
        .collect()
}

/// Space-time version of `base`: state `(x, m)` steps to `(y, m + 1)` with
/// probability `P(x, y)`. Generations are confined to `0..=horizon`; mass leaving
/// the last generation is killed.
pub fn space_time_lift(base: &Kernel, horizon: u32) -> Kernel {
    let base = Arc::new(base.clone());
    let n = base.len();
    let layers = horizon as usize + 1;
    let mut rows = Vec::with_capacity(n * layers);
    let mut labels = Vec::with_capacity(n * layers);
    for m in 0..layers {
        for x in 0..n {
            labels.push(format!("({},{m})", base.label(x)));
            if m == horizon as usize {
                rows.push(Vec::new());
            } else {
                rows.push(base.transitions(x).iter().map(|(y, p)| ((m + 1) * n + y, p.clone())).collect());
            }
        }
    }
    Kernel::assemble(
        format!("spacetime[{}; 0..={horizon}]", base.name()),
        labels,
        rows,
        base.origin(),
        base.boundary(),
        Geometry::SpaceTime { base, horizon },
    )
}

/// Growth profile `f(n)` used by displacement sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateFn {
    Linear,
    Sqrt,
    Log,
}

impl RateFn {
    pub fn eval(self, n: u32) -> f64 {
        let x = n as f64;
        match self {
            RateFn::Linear => x,
            RateFn::Sqrt => x.sqrt(),
            RateFn::Log => (1.0 + x).ln(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Rule {
    Empty,
    /// Time-invariant membership over base states.
    States(Vec<bool>),
    /// `{(y, n) : n ≥ 1, d(y, x0) ≥ level · f(n)}` with distances precomputed.
    Displacement { dist: Vec<u32>, level: f64, rate: RateFn },
    Pairs(HashSet<(StateId, u32)>),
}

/// A subset of (state, generation) pairs over a kernel's base states.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeSet {
    label: String,
    rule: Rule,
    /// Membership is false before this generation (the set `A_k`).
    from_generation: u32,
}

impl SpaceTimeSet {
    pub fn empty() -> Self {
        SpaceTimeSet { label: "empty".into(), rule: Rule::Empty, from_generation: 0 }
    }

    /// `{o} × Z`: the kernel's origin at every generation.
    pub fn origin(kernel: &Kernel) -> Self {
        let base = kernel.base();
        Self::states(base, &[base.origin()]).with_label("origin")
    }

    pub fn states(kernel: &Kernel, states: &[StateId]) -> Self {
        let base = kernel.base();
        let mut mask = vec![false; base.len()];
        for &s in states {
            mask[s] = true;
        }
        SpaceTimeSet { label: format!("states({})", states.len()), rule: Rule::States(mask), from_generation: 0 }
    }

    pub fn from_labels(kernel: &Kernel, labels: &[String]) -> Result<Self, KernelError> {
        let base = kernel.base();
        let ids = labels
            .iter()
            .map(|l| base.state_by_label(l).ok_or_else(|| KernelError::UnknownState(l.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::states(base, &ids))
    }

    /// States whose first coordinate is at least `c` (depth for trees).
    pub fn halfspace(kernel: &Kernel, c: i64) -> Result<Self, KernelError> {
        let base = kernel.base();
        let mask = (0..base.len())
            .map(|s| {
                base.first_coordinate(s)
                    .map(|x| x >= c)
                    .ok_or_else(|| KernelError::UnsupportedSet("halfspace".into(), base.name().into()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SpaceTimeSet { label: format!("halfspace({c})"), rule: Rule::States(mask), from_generation: 0 })
    }

    /// `{(y, n) : n ≥ 1, d(y, origin) ≥ level · f(n)}`.
    pub fn displacement(kernel: &Kernel, level: f64, rate: RateFn) -> Result<Self, KernelError> {
        let base = kernel.base();
        let dist = (0..base.len())
            .map(|s| base.distance(s, base.origin()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SpaceTimeSet {
            label: format!("displacement({level},{rate:?})"),
            rule: Rule::Displacement { dist, level, rate },
            from_generation: 0,
        })
    }

    /// Explicit `(state label, generation)` members.
    pub fn custom(kernel: &Kernel, members: &[(String, u32)]) -> Result<Self, KernelError> {
        let base = kernel.base();
        let pairs = members
            .iter()
            .map(|(l, n)| {
                base.state_by_label(l)
                    .map(|s| (s, *n))
                    .ok_or_else(|| KernelError::UnknownState(l.clone()))
            })
            .collect::<Result<HashSet<_>, _>>()?;
        Ok(SpaceTimeSet { label: format!("custom({})", pairs.len()), rule: Rule::Pairs(pairs), from_generation: 0 })
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    /// `A_k = A ∩ (S × [k, ∞))`.
    pub fn from_generation(mut self, k: u32) -> Self {
        self.from_generation = self.from_generation.max(k);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_empty_set(&self) -> bool {
        match &self.rule {
            Rule::Empty => true,
            Rule::States(m) => !m.iter().any(|&b| b),
            Rule::Pairs(p) => p.is_empty(),
            Rule::Displacement { .. } => false,
        }
    }

    pub fn is_time_invariant(&self) -> bool {
        self.from_generation == 0 && matches!(self.rule, Rule::Empty | Rule::States(_))
    }

    /// Membership of the base state `x` at generation `n`.
    pub fn contains(&self, x: StateId, n: u32) -> bool {
        if n < self.from_generation {
            return false;
        }
        match &self.rule {
            Rule::Empty => false,
            Rule::States(mask) => mask[x],
            Rule::Displacement { dist, level, rate } => n >= 1 && dist[x] as f64 >= level * rate.eval(n),
            Rule::Pairs(p) => p.contains(&(x, n)),
        }
    }

    /// Membership of a kernel state reached at generation `n`; lifted states carry
    /// their own generation.
    pub fn contains_state(&self, kernel: &Kernel, s: StateId, n: u32) -> bool {
        let (x, m) = kernel.space_time_coords(s);
        self.contains(x, m.unwrap_or(n))
    }

    /// Indicator over the kernel's states, valid for kernels whose states determine
    /// the generation (lifts) or for time-invariant sets.
    pub fn indicator(&self, kernel: &Kernel) -> Option<Vec<bool>> {
        if !kernel.is_space_time() && !self.is_time_invariant() {
            return None;
        }
        Some((0..kernel.len()).map(|s| self.contains_state(kernel, s, 0)).collect())
    }

    /// Last generation at which membership can differ from its long-run pattern.
    pub fn declared_window(&self) -> (u32, Option<u32>) {
        let max = match &self.rule {
            Rule::Pairs(p) => p.iter().map(|(_, n)| *n).max(),
            _ => None,
        };
        (self.from_generation, max)
    }
}

// ---- configuration schema -------------------------------------------------

/// Kernel description as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelSpec {
    Lattice {
        d: usize,
        #[serde(rename = "R")]
        radius: i32,
        #[serde(default)]
        boundary: Boundary,
    },
    Tree {
        b: u32,
        #[serde(rename = "R")]
        radius: u32,
        #[serde(default)]
        boundary: Boundary,
    },
    Explicit {
        rows: Vec<ExplicitRow>,
        #[serde(default)]
        graph_metric: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplicitRow {
    pub state: String,
    /// `[target, probability]` pairs; probabilities as rational strings.
    pub next: Vec<(String, String)>,
}

impl KernelSpec {
    pub fn build(&self) -> Result<Kernel, KernelError> {
        match self {
            KernelSpec::Lattice { d, radius, boundary } => build_lattice(*d, *radius, *boundary),
            KernelSpec::Tree { b, radius, boundary } => build_tree(*b, *radius, *boundary),
            KernelSpec::Explicit { rows, graph_metric } => {
                let table = rows
                    .iter()
                    .map(|r| {
                        let next = r
                            .next
                            .iter()
                            .map(|(t, p)| {
                                parse_rational(p)
                                    .map(|p| (t.clone(), p))
                                    .map_err(|source| KernelError::Probability { state: r.state.clone(), source })
                            })
                            .collect::<Result<Vec<_>, _>>()?;
                        Ok((r.state.clone(), next))
                    })
                    .collect::<Result<Vec<_>, KernelError>>()?;
                build_explicit(&table, *graph_metric)
            }
        }
    }

    /// Same kernel family with the window radius multiplied by `factor`.
    pub fn scaled(&self, factor: u32) -> KernelSpec {
        match self {
            KernelSpec::Lattice { d, radius, boundary } => {
                KernelSpec::Lattice { d: *d, radius: radius * factor as i32, boundary: *boundary }
            }
            KernelSpec::Tree { b, radius, boundary } => {
                KernelSpec::Tree { b: *b, radius: radius * factor, boundary: *boundary }
            }
            other => other.clone(),
        }
    }
}

/// Space-time set description as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SetSpec {
    Empty,
    Origin {
        #[serde(default)]
        from_generation: u32,
    },
    States {
        labels: Vec<String>,
        #[serde(default)]
        from_generation: u32,
    },
    Halfspace {
        c: i64,
        #[serde(default)]
        from_generation: u32,
    },
    Displacement {
        alpha: f64,
        #[serde(default)]
        epsilon: f64,
        #[serde(default = "default_rate")]
        rate: RateFn,
    },
    Custom {
        members: Vec<(String, u32)>,
    },
}

fn default_rate() -> RateFn {
    RateFn::Linear
}

impl SetSpec {
    pub fn build(&self, kernel: &Kernel) -> Result<SpaceTimeSet, KernelError> {
        Ok(match self {
            SetSpec::Empty => SpaceTimeSet::empty(),
            SetSpec::Origin { from_generation } => SpaceTimeSet::origin(kernel).from_generation(*from_generation),
            SetSpec::States { labels, from_generation } => {
                SpaceTimeSet::from_labels(kernel, labels)?.from_generation(*from_generation)
            }
            SetSpec::Halfspace { c, from_generation } => {
                SpaceTimeSet::halfspace(kernel, *c)?.from_generation(*from_generation)
            }
            SetSpec::Displacement { alpha, epsilon, rate } => {
                SpaceTimeSet::displacement(kernel, alpha - epsilon, *rate)?
            }
            SetSpec::Custom { members } => SpaceTimeSet::custom(kernel, members)?,
        })
    }
}
