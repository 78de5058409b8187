//! Occupancy-count simulation: the law of `(B_n(y))_{n, y}` without individual
//! particles.
//!
//! Given `B_n(x) = N`, the offspring counts of the `N` particles at `x` are
//! multinomial over the outcomes of the offspring law, and the resulting children
//! are multinomial over the kernel row of `x` (plus the killed mass). Both
//! multinomials are drawn as chains of binomials, so a generation costs
//! `O(occupied states)` regardless of its size, and horizons with astronomically
//! many particles stay cheap. Genealogy is not tracked; use [`crate::simulate`]
//! for pioneer counts.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::offspring::OffspringDist;
use crate::rational::to_f64;
use crate::rng::Stream;
use crate::simulate::SimError;
use crate::statespace::{Kernel, KernelError, SpaceTimeSet, StateId};

/// Default bound on the total size of a generation (keeps counts far from overflow).
pub const DEFAULT_COUNT_CAP: u64 = 1 << 62;

/// Probabilities prepared for repeated multinomial draws.
#[derive(Debug, Clone)]
pub struct OccupancyModel {
    kernel: Arc<Kernel>,
    outcomes: Vec<(u64, f64)>,
    /// Per state: targets and probabilities; the killed mass is the remainder.
    rows: Vec<(Vec<StateId>, Vec<f64>)>,
}

impl OccupancyModel {
    pub fn new(kernel: &Arc<Kernel>, dist: &OffspringDist) -> Self {
        let rows = (0..kernel.len())
            .map(|s| {
                let row = kernel.transitions(s);
                (row.iter().map(|(t, _)| *t).collect(), row.iter().map(|(_, p)| to_f64(p)).collect())
            })
            .collect();
        OccupancyModel {
            kernel: Arc::clone(kernel),
            outcomes: dist.atoms().iter().map(|(k, m)| (*k as u64, to_f64(m))).collect(),
            rows,
        }
    }

    pub fn kernel(&self) -> &Arc<Kernel> {
        &self.kernel
    }
}

/// Draws one binomial, tolerating rounding noise in `p`.
fn binomial<R: Rng>(n: u64, p: f64, rng: &mut R) -> u64 {
    if n == 0 || p <= 0.0 {
        0
    } else if p >= 1.0 {
        n
    } else {
        Binomial::new(n, p).expect("p lies in (0, 1)").sample(rng)
    }
}

/// Multinomial counts over `probs`; the mass missing from `probs` is an implicit
/// last category whose count is returned separately.
fn multinomial<R: Rng>(n: u64, probs: &[f64], rng: &mut R, out: &mut Vec<u64>) -> u64 {
    out.clear();
    let mut remaining = n;
    let mut mass = 1.0;
    for &p in probs {
        let k = if mass <= 0.0 { 0 } else { binomial(remaining, p / mass, rng) };
        out.push(k);
        remaining -= k;
        mass -= p;
    }
    remaining
}

#[derive(Debug, Clone)]
pub struct OccupancyTrajectory {
    pub kernel: Arc<Kernel>,
    pub start: StateId,
    pub horizon: u32,
    /// Per stored generation, the occupied states (ascending) with their counts.
    pub generations: Vec<Vec<(StateId, u64)>>,
    pub extinct_at: Option<u32>,
    pub cap_hit: bool,
}

impl OccupancyTrajectory {
    pub fn last_generation(&self) -> u32 {
        self.generations.len() as u32 - 1
    }

    pub fn survived(&self) -> bool {
        self.extinct_at.is_none() && !self.cap_hit
    }

    pub fn size(&self, n: u32) -> u128 {
        self.generations
            .get(n as usize)
            .map_or(0, |g| g.iter().map(|(_, c)| *c as u128).sum())
    }

    /// `L_n(A)` over stored generations `0..=n`.
    pub fn local_time(&self, set: &SpaceTimeSet, n: u32) -> u128 {
        if set.is_empty_set() {
            return 0;
        }
        self.generations
            .iter()
            .enumerate()
            .take(n as usize + 1)
            .map(|(g, occ)| {
                occ.iter()
                    .filter(|(s, _)| set.contains_state(&self.kernel, *s, g as u32))
                    .map(|(_, c)| *c as u128)
                    .sum::<u128>()
            })
            .sum()
    }

    /// Base states occupied at some stored generation, ascending.
    pub fn visited(&self) -> Vec<StateId> {
        let mut seen = vec![false; self.kernel.base().len()];
        for occ in &self.generations {
            for (s, _) in occ {
                seen[self.kernel.space_time_coords(*s).0] = true;
            }
        }
        (0..seen.len()).filter(|&s| seen[s]).collect()
    }

    /// `M_n` per stored generation.
    pub fn max_displacement(&self, origin: StateId) -> Result<Vec<Option<u32>>, KernelError> {
        if !self.kernel.has_metric() {
            return Err(KernelError::MetricUnavailable(self.kernel.name().to_string()));
        }
        self.generations
            .iter()
            .map(|occ| {
                occ.iter()
                    .map(|(s, _)| self.kernel.distance(origin, *s))
                    .try_fold(None, |acc: Option<u32>, d| d.map(|d| Some(acc.map_or(d, |a| a.max(d)))))
            })
            .collect()
    }
}

/// Simulates occupancy counts from one particle at `start`. Generations whose
/// total would exceed `cap` end the run with `cap_hit`.
pub fn simulate_occupancy(
    model: &OccupancyModel,
    start: StateId,
    horizon: u32,
    cap: u64,
    mut stream: Stream,
) -> Result<OccupancyTrajectory, SimError> {
    let kernel = &model.kernel;
    if start >= kernel.len() {
        return Err(SimError::StartOutsideWindow(start));
    }
    if cap == 0 {
        return Err(SimError::ZeroCap);
    }
    let probs: Vec<f64> = model.outcomes.iter().map(|(_, p)| *p).collect();
    let mut generations = vec![vec![(start, 1u64)]];
    let mut extinct_at = None;
    let mut cap_hit = false;
    let mut next = vec![0u64; kernel.len()];
    let mut touched: Vec<StateId> = Vec::new();
    let mut draws = Vec::new();

    'generations: for n in 1..=horizon {
        let current = generations.last().unwrap();
        let mut total: u128 = 0;
        for &(x, count) in current {
            // The last outcome absorbs whatever the others leave.
            let last = multinomial(count, &probs[..probs.len() - 1], &mut stream, &mut draws);
            let children: u128 = draws
                .iter()
                .chain(std::iter::once(&last))
                .zip(&model.outcomes)
                .map(|(c, (k, _))| *c as u128 * *k as u128)
                .sum();
            if children == 0 {
                continue;
            }
            if total + children > cap as u128 {
                cap_hit = true;
                break 'generations;
            }
            total += children;
            let (targets, row) = &model.rows[x];
            multinomial(children as u64, row, &mut stream, &mut draws);
            for (y, c) in targets.iter().zip(&draws) {
                if *c > 0 {
                    if next[*y] == 0 {
                        touched.push(*y);
                    }
                    next[*y] += c;
                }
            }
        }
        touched.sort_unstable();
        let occ: Vec<(StateId, u64)> = touched.iter().map(|&y| (y, std::mem::take(&mut next[y]))).collect();
        touched.clear();
        if occ.is_empty() {
            extinct_at = Some(n);
            break;
        }
        generations.push(occ);
    }

    Ok(OccupancyTrajectory {
        kernel: Arc::clone(kernel),
        start,
        horizon,
        generations,
        extinct_at,
        cap_hit,
    })
}
