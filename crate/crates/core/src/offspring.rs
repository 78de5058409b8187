//! Finite-support offspring distributions with exact rational weights.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::poly::{Poly, SturmChain};
use crate::rational::{fmt_q, parse_rational, to_f64, ParseRationalError, Q};

/// Polynomials above this degree skip exact Sturm isolation when solving for the
/// extinction probability and fall back to floating-point bisection.
pub const EXACT_DEGREE_CAP: usize = 64;

/// Absolute tolerance of every non-exact extinction probability.
pub const EXTINCTION_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DistError {
    #[error("distribution has no atoms")]
    Empty,
    #[error("outcomes must be strictly increasing (saw {0} after {1})")]
    Unordered(u32, u32),
    #[error("atom at {0} has non-positive mass")]
    NonPositiveMass(u32),
    #[error("masses sum to {0}, expected exactly 1")]
    NotNormalized(String),
    #[error("malformed distribution literal `{literal}`: {reason}")]
    Syntax { literal: String, reason: String },
    #[error(transparent)]
    Rational(#[from] ParseRationalError),
    #[error("argument {0} lies outside [0, 1]")]
    Domain(String),
}

/// A probability measure on `{0, 1, 2, ...}` with finitely many atoms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OffspringDist {
    atoms: Vec<(u32, Q)>,
}

impl OffspringDist {
    pub fn new(atoms: Vec<(u32, Q)>) -> Result<Self, DistError> {
        if atoms.is_empty() {
            return Err(DistError::Empty);
        }
        for w in atoms.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(DistError::Unordered(w[1].0, w[0].0));
            }
        }
        if let Some((k, _)) = atoms.iter().find(|(_, m)| *m <= Q::zero()) {
            return Err(DistError::NonPositiveMass(*k));
        }
        let total: Q = atoms.iter().map(|(_, m)| m).sum();
        if !total.is_one() {
            return Err(DistError::NotNormalized(fmt_q(&total)));
        }
        Ok(OffspringDist { atoms })
    }

    /// Builds from unsorted `(outcome, mass)` pairs, merging repeats and
    /// dropping zero masses.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, Q)>) -> Result<Self, DistError> {
        let mut merged = std::collections::BTreeMap::<u32, Q>::new();
        for (k, m) in pairs {
            *merged.entry(k).or_insert_with(Q::zero) += m;
        }
        Self::new(merged.into_iter().filter(|(_, m)| !m.is_zero()).collect())
    }

    pub fn atom(k: u32) -> Self {
        OffspringDist { atoms: vec![(k, Q::one())] }
    }

    pub fn atoms(&self) -> &[(u32, Q)] {
        &self.atoms
    }

    pub fn mass(&self, k: u32) -> Q {
        self.atoms
            .iter()
            .find(|(o, _)| *o == k)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(Q::zero)
    }

    pub fn max_outcome(&self) -> u32 {
        self.atoms.last().unwrap().0
    }

    pub fn is_atom_at_one(&self) -> bool {
        self.atoms.len() == 1 && self.atoms[0].0 == 1
    }

    /// The generating function `Σ μ(k) t^k` as a polynomial.
    pub fn pgf(&self) -> Poly {
        let mut coeffs = vec![Q::zero(); self.max_outcome() as usize + 1];
        for (k, m) in &self.atoms {
            coeffs[*k as usize] = m.clone();
        }
        Poly::new(coeffs)
    }

    pub fn pgf_eval(&self, t: &Q) -> Result<Q, DistError> {
        if *t < Q::zero() || *t > Q::one() {
            return Err(DistError::Domain(fmt_q(t)));
        }
        Ok(self.pgf().eval(t))
    }

    pub fn pgf_eval_f64(&self, t: f64) -> f64 {
        self.atoms
            .iter()
            .map(|(k, m)| to_f64(m) * t.powi(*k as i32))
            .sum()
    }

    pub fn mean(&self) -> Q {
        self.atoms
            .iter()
            .map(|(k, m)| m * Q::from_integer((*k).into()))
            .sum()
    }

    /// Raw moments `Σ n^k μ(n)` and factorial moments `Σ n(n-1)…(n-k+1) μ(n)`
    /// for `k = 1..=k_max` (index 0 of each vector is `k = 1`).
    pub fn moments(&self, k_max: usize) -> (Vec<Q>, Vec<Q>) {
        let mut raw = vec![Q::zero(); k_max];
        let mut fact = vec![Q::zero(); k_max];
        for (n, m) in &self.atoms {
            let n_q = Q::from_integer((*n).into());
            let mut power = Q::one();
            let mut falling = Q::one();
            for k in 0..k_max {
                power *= &n_q;
                falling *= &n_q - Q::from_integer(k.into());
                raw[k] += &power * m;
                fact[k] += &falling * m;
            }
        }
        (raw, fact)
    }

    pub fn factorial_moments(&self, k_max: usize) -> Vec<Q> {
        self.moments(k_max).1
    }

    pub fn is_supercritical(&self) -> bool {
        self.mean() > Q::one()
    }

    /// Smallest fixed point of the generating function in `[0, 1]`.
    pub fn extinction_probability(&self) -> ExtinctionResult {
        if self.is_atom_at_one() {
            return ExtinctionResult { q: Probability::Exact(Q::one()), degenerate: true };
        }
        if !self.is_supercritical() {
            return ExtinctionResult { q: Probability::Exact(Q::one()), degenerate: false };
        }
        if self.mass(0).is_zero() {
            return ExtinctionResult { q: Probability::Exact(Q::zero()), degenerate: false };
        }
        // f(s) = P(s) - s is convex with f(0) > 0 > f(1-) here, so it has a single
        // root in (0, 1).
        let f = &self.pgf() - &Poly::x();
        let q = if self.max_outcome() as usize <= EXACT_DEGREE_CAP {
            let sturm = SturmChain::new(&f);
            let below_one = Q::one() - Q::new(1.into(), (1u64 << 60).into());
            let mut ivs = sturm.isolate(&Q::zero(), &below_one);
            if ivs.is_empty() {
                // The root sits in (1 - 2^-60, 1): too close to one to matter.
                return ExtinctionResult { q: Probability::Approx(1.0), degenerate: false };
            }
            let iv = ivs.remove(0);
            let tol = Q::new(1.into(), (1u64 << 44).into());
            let r = sturm.refine(&iv, &tol);
            if r.is_exact() {
                Probability::Exact(r.lo)
            } else {
                Probability::Approx(r.midpoint_f64())
            }
        } else {
            Probability::Approx(bisect_f64(|s| self.pgf_eval_f64(s) - s, 0.0, 1.0 - 1e-15))
        };
        ExtinctionResult { q, degenerate: false }
    }

    /// Cumulative masses as floats, for sampling.
    pub fn cdf_f64(&self) -> Vec<(u32, f64)> {
        let mut acc = Q::zero();
        self.atoms
            .iter()
            .map(|(k, m)| {
                acc += m;
                (*k, to_f64(&acc))
            })
            .collect()
    }
}

fn bisect_f64(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    // f(lo) > 0 > f(hi) by the caller's convexity argument.
    while hi - lo > EXTINCTION_TOL / 4.0 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Probability {
    Exact(Q),
    Approx(f64),
}

impl Probability {
    pub fn to_f64(&self) -> f64 {
        match self {
            Probability::Exact(q) => to_f64(q),
            Probability::Approx(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&Q> {
        match self {
            Probability::Exact(q) => Some(q),
            Probability::Approx(_) => None,
        }
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Probability::Exact(q) => write!(f, "{}", fmt_q(q)),
            Probability::Approx(x) => write!(f, "{x:.17e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtinctionResult {
    pub q: Probability,
    /// Set for the atom at one, whose extinction probability is 1 by convention.
    pub degenerate: bool,
}

impl ExtinctionResult {
    pub fn is_exact(&self) -> bool {
        matches!(self.q, Probability::Exact(_))
    }

    pub fn survival(&self) -> f64 {
        1.0 - self.q.to_f64()
    }
}

impl fmt::Display for OffspringDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .atoms
            .iter()
            .map(|(k, m)| format!("{k}:{}", fmt_q(m)))
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl fmt::Debug for OffspringDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for OffspringDist {
    type Err = DistError;

    /// `{0:1/4,2:3/4}`; masses may be fractions or exact decimals.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = |reason: &str| DistError::Syntax { literal: s.to_string(), reason: reason.into() };
        let body = s
            .trim()
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| syntax("expected braces"))?;
        if body.trim().is_empty() {
            return Err(DistError::Empty);
        }
        let mut pairs = Vec::new();
        for item in body.split(',') {
            let (k, m) = item.split_once(':').ok_or_else(|| syntax("expected outcome:mass"))?;
            let k: u32 = k.trim().parse().map_err(|_| syntax("outcome is not a nonnegative integer"))?;
            pairs.push((k, parse_rational(m)?));
        }
        let mut sorted = pairs.clone();
        sorted.sort_by_key(|p| p.0);
        if sorted.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(syntax("repeated outcome"));
        }
        OffspringDist::new(sorted)
    }
}

impl Serialize for OffspringDist {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for OffspringDist {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The measure on `{⌊m⌋, ⌈m⌉}` with mean `m` (an atom when `m` is an integer).
pub fn lattice_point_mass(m: &Q) -> OffspringDist {
    let lo = m.floor();
    let frac = m - &lo;
    let lo_k = lo.to_integer().to_u32().expect("mean fits in u32");
    if frac.is_zero() {
        OffspringDist::atom(lo_k)
    } else {
        OffspringDist::new(vec![(lo_k, Q::one() - &frac), (lo_k + 1, frac)]).unwrap()
    }
}
