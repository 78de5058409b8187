//! Seeded simulation of branching Markov chains.
//!
//! Generation `n + 1` is produced from generation `n` particle by particle: a
//! particle draws its offspring count from its own stream, and its `i`-th child
//! gets the stream `parent.child(i)`, whose first uniform decides the child's
//! kernel step. Trajectories are thus a deterministic function of the inputs and
//! `(seed, replica)`, whatever the thread layout.
//!
//! Children stepping into killed mass are dropped. On a space-time lift the rows
//! carry the same cumulative probabilities as the base rows, so the same uniforms
//! give the same moves and projecting a lifted trajectory recovers the base one.

use std::sync::Arc;

use thiserror::Error;

use crate::offspring::OffspringDist;
use crate::rng::Stream;
use crate::statespace::{Kernel, KernelError, SpaceTimeSet, StateId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("start state {0} lies outside the window")]
    StartOutsideWindow(StateId),
    #[error("generation cap must be at least 1")]
    ZeroCap,
}

/// One generation: particle `i` sits at `states[i]` and descends from particle
/// `parents[i]` of the previous generation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Population {
    pub generation: u32,
    pub states: Vec<StateId>,
    pub parents: Vec<u32>,
}

impl Population {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `B_n(y)`: number of particles at each state.
    pub fn occupancy(&self, n_states: usize) -> Vec<u64> {
        let mut counts = vec![0; n_states];
        for &s in &self.states {
            counts[s] += 1;
        }
        counts
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub kernel: Arc<Kernel>,
    pub start: StateId,
    pub seed: u64,
    pub replica: u64,
    pub horizon: u32,
    /// Generations `0..` up to the horizon, the extinction time or the cap.
    pub populations: Vec<Population>,
    /// First empty generation.
    pub extinct_at: Option<u32>,
    /// The generation after the last stored one exceeded the cap.
    pub cap_hit: bool,
}

impl Trajectory {
    /// Last stored generation.
    pub fn last_generation(&self) -> u32 {
        self.populations.len() as u32 - 1
    }

    /// Alive at the horizon with every generation simulated.
    pub fn survived(&self) -> bool {
        self.extinct_at.is_none() && !self.cap_hit
    }

    pub fn final_size(&self) -> usize {
        if self.extinct_at.is_some() {
            0
        } else {
            self.populations.last().map_or(0, Population::len)
        }
    }

    /// Generations `0..=n` are all known: stored, or implied empty by extinction.
    pub fn determined_through(&self, n: u32) -> bool {
        self.extinct_at.is_some() || n <= self.last_generation()
    }

    fn generations_through(&self, n: u32) -> impl Iterator<Item = &Population> {
        self.populations.iter().take_while(move |p| p.generation <= n)
    }

    /// `L_n(A)`: particle visits to `A` among generations `0..=n` (stored ones).
    pub fn local_time(&self, set: &SpaceTimeSet, n: u32) -> u64 {
        if set.is_empty_set() {
            return 0;
        }
        self.generations_through(n)
            .map(|p| p.states.iter().filter(|&&s| set.contains_state(&self.kernel, s, p.generation)).count() as u64)
            .sum()
    }

    /// For every stored generation, whether each particle's strict ancestors
    /// include one in `set`.
    pub fn ancestor_flags(&self, set: &SpaceTimeSet) -> Vec<Vec<bool>> {
        let mut flags: Vec<Vec<bool>> = Vec::with_capacity(self.populations.len());
        for (g, pop) in self.populations.iter().enumerate() {
            let current = if g == 0 {
                vec![false; pop.len()]
            } else {
                let prev = &self.populations[g - 1];
                pop.parents
                    .iter()
                    .map(|&p| {
                        let p = p as usize;
                        flags[g - 1][p] || set.contains_state(&self.kernel, prev.states[p], prev.generation)
                    })
                    .collect()
            };
            flags.push(current);
        }
        flags
    }

    /// `E_n(D)`: particles in `D` by generation `n` with no strict ancestor in `D`.
    pub fn pioneer_count(&self, set: &SpaceTimeSet, n: u32) -> u64 {
        if set.is_empty_set() {
            return 0;
        }
        let flags = self.ancestor_flags(set);
        self.generations_through(n)
            .zip(&flags)
            .map(|(p, f)| {
                p.states
                    .iter()
                    .zip(f)
                    .filter(|(&s, &hit)| !hit && set.contains_state(&self.kernel, s, p.generation))
                    .count() as u64
            })
            .sum()
    }

    /// `M_n = max d(origin, y)` over occupied `y`, `None` for empty generations.
    pub fn max_displacement(&self, origin: StateId) -> Result<Vec<Option<u32>>, KernelError> {
        if !self.kernel.has_metric() {
            return Err(KernelError::MetricUnavailable(self.kernel.name().to_string()));
        }
        self.populations
            .iter()
            .map(|p| {
                p.states
                    .iter()
                    .map(|&s| self.kernel.distance(origin, s))
                    .try_fold(None, |acc: Option<u32>, d| d.map(|d| Some(acc.map_or(d, |a| a.max(d)))))
            })
            .collect()
    }

    /// States replaced by their base coordinates (identity on base kernels).
    pub fn projected(&self) -> Vec<Vec<StateId>> {
        self.populations
            .iter()
            .map(|p| p.states.iter().map(|&s| self.kernel.space_time_coords(s).0).collect())
            .collect()
    }

    /// Parent links of every generation.
    pub fn genealogy(&self) -> Vec<&[u32]> {
        self.populations.iter().map(|p| p.parents.as_slice()).collect()
    }
}

/// Inverse-CDF sampler for an offspring law.
#[derive(Debug, Clone)]
pub struct OffspringSampler {
    table: Vec<(u32, f64)>,
}

impl OffspringSampler {
    pub fn new(dist: &OffspringDist) -> Self {
        let mut table = dist.cdf_f64();
        if let Some(last) = table.last_mut() {
            last.1 = f64::INFINITY;
        }
        OffspringSampler { table }
    }

    pub fn sample(&self, u: f64) -> u32 {
        self.table.iter().find(|(_, c)| u < *c).map(|(k, _)| *k).unwrap()
    }
}

/// Simulates replica 0 of `seed`.
pub fn simulate(
    kernel: &Arc<Kernel>,
    dist: &OffspringDist,
    start: StateId,
    horizon: u32,
    cap: usize,
    seed: u64,
) -> Result<Trajectory, SimError> {
    simulate_replica(kernel, &OffspringSampler::new(dist), start, horizon, cap, seed, 0)
}

pub fn simulate_replica(
    kernel: &Arc<Kernel>,
    sampler: &OffspringSampler,
    start: StateId,
    horizon: u32,
    cap: usize,
    seed: u64,
    replica: u64,
) -> Result<Trajectory, SimError> {
    if start >= kernel.len() {
        return Err(SimError::StartOutsideWindow(start));
    }
    if cap == 0 {
        return Err(SimError::ZeroCap);
    }
    let mut streams = vec![Stream::replica(seed, replica)];
    let mut populations = vec![Population { generation: 0, states: vec![start], parents: vec![0] }];
    let mut extinct_at = None;
    let mut cap_hit = false;

    for n in 1..=horizon {
        let prev = populations.last().unwrap();
        let mut states = Vec::new();
        let mut parents = Vec::new();
        let mut next_streams = Vec::new();
        'parents: for (i, stream) in streams.iter_mut().enumerate() {
            let k = sampler.sample(stream.uniform());
            let here = prev.states[i];
            for c in 0..k {
                let mut child = stream.child(c as u64);
                if let Some(y) = kernel.step(here, child.uniform()) {
                    if states.len() == cap {
                        cap_hit = true;
                        break 'parents;
                    }
                    states.push(y);
                    parents.push(i as u32);
                    next_streams.push(child);
                }
            }
        }
        if cap_hit {
            break;
        }
        if states.is_empty() {
            extinct_at = Some(n);
            break;
        }
        populations.push(Population { generation: n, states, parents });
        streams = next_streams;
    }

    Ok(Trajectory {
        kernel: Arc::clone(kernel),
        start,
        seed,
        replica,
        horizon,
        populations,
        extinct_at,
        cap_hit,
    })
}
