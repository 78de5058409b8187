//! Random instances shared by the integration tests.

#![allow(dead_code)]

use germlab::offspring::OffspringDist;
use germlab::rational::q;
use germlab::rng::Stream;
use rand::Rng;

/// Largest offspring count drawn by [`random_dist`].
pub const MAX_OUTCOME: u32 = 8;

/// Unit masses over outcomes `0..=MAX_OUTCOME`, all with denominator `den`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Units {
    pub den: u32,
    pub counts: Vec<u32>,
}

impl Units {
    pub fn dist(&self) -> OffspringDist {
        OffspringDist::from_pairs(
            self.counts
                .iter()
                .enumerate()
                .filter(|(_, c)| **c > 0)
                .map(|(k, c)| (k as u32, q(*c as i64, self.den as i64))),
        )
        .expect("units sum to one")
    }

    /// Moves `moves` random units to strictly larger outcomes, giving a law that is
    /// stochastically larger.
    pub fn shifted_up(&self, rng: &mut Stream, moves: u32) -> Units {
        let mut out = self.clone();
        for _ in 0..moves {
            let movable: Vec<usize> =
                (0..MAX_OUTCOME as usize).filter(|&k| out.counts[k] > 0).collect();
            if movable.is_empty() {
                break;
            }
            let from = movable[rng.gen_range(0..movable.len())];
            let to = rng.gen_range(from + 1..=MAX_OUTCOME as usize);
            out.counts[from] -= 1;
            out.counts[to] += 1;
        }
        out
    }
}

/// A law with at most `max_support` atoms among `0..=MAX_OUTCOME` and denominator
/// at most `max_den`.
pub fn random_units(rng: &mut Stream, max_support: usize, max_den: u32) -> Units {
    let support = rng.gen_range(1..=max_support.min(MAX_OUTCOME as usize + 1));
    let mut outcomes: Vec<usize> = (0..=MAX_OUTCOME as usize).collect();
    for i in 0..support {
        let j = rng.gen_range(i..outcomes.len());
        outcomes.swap(i, j);
    }
    let den = rng.gen_range(support as u32..=max_den.max(support as u32));
    let mut counts = vec![0u32; MAX_OUTCOME as usize + 1];
    for &k in &outcomes[..support] {
        counts[k] = 1;
    }
    for _ in support as u32..den {
        counts[outcomes[rng.gen_range(0..support)]] += 1;
    }
    Units { den, counts }
}

pub fn random_dist(rng: &mut Stream, max_support: usize, max_den: u32) -> OffspringDist {
    random_units(rng, max_support, max_den).dist()
}

/// Sample mean and standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Proptest strategy: up to five atoms among `0..=MAX_OUTCOME`, denominators ≤ 20.
pub fn dist_strategy() -> impl proptest::strategy::Strategy<Value = OffspringDist> {
    use proptest::prelude::*;
    prop::collection::btree_map(0..=MAX_OUTCOME, 1u32..=4, 1..=5).prop_map(|w| {
        let den: u32 = w.values().sum();
        OffspringDist::from_pairs(w.into_iter().map(|(k, c)| (k, q(c as i64, den as i64)))).unwrap()
    })
}
