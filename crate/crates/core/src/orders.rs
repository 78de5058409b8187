//! Exact decision procedures for the standard, increasing-concave, pgf and germ
//! orders on finite-support offspring distributions.
//!
//! Conventions follow the generating-function reversal: `μ ≤_pgf ν` means
//! `P_μ(t) ≥ P_ν(t)` on `[0, 1]`, and `μ ≤_germ ν` means the same inequality on
//! some left neighbourhood of 1. Every sign question about `D = P_μ − P_ν` is
//! answered with Sturm sequences over the rationals.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::offspring::OffspringDist;
use crate::poly::{sign, Poly, RootInterval, SturmChain};
use crate::rational::{ceil_to_denominator, fmt_q, to_f64, Q};

/// Denominator used when an irrational threshold is rounded up to a rational.
pub const THRESHOLD_DENOMINATOR: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrderError {
    #[error("μ is not strictly below ν in the germ order (verdict: {0})")]
    NotGermLess(Relation),
    #[error("threshold {0} does not certify P_μ ≥ P_ν on [threshold, 1]")]
    AlphaInvalid(String),
    #[error("unknown order `{0}` (expected st, icv, pgf or germ)")]
    UnknownOrder(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Order {
    #[serde(rename = "st")]
    Standard,
    #[serde(rename = "icv")]
    IncreasingConcave,
    #[serde(rename = "pgf")]
    Pgf,
    #[serde(rename = "germ")]
    Germ,
}

impl Order {
    pub const ALL: [Order; 4] = [Order::Standard, Order::IncreasingConcave, Order::Pgf, Order::Germ];

    pub fn compare(self, mu: &OffspringDist, nu: &OffspringDist) -> OrderVerdict {
        match self {
            Order::Standard => compare_st(mu, nu),
            Order::IncreasingConcave => compare_icv(mu, nu),
            Order::Pgf => compare_pgf(mu, nu),
            Order::Germ => compare_germ(mu, nu),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Order::Standard => "st",
            Order::IncreasingConcave => "icv",
            Order::Pgf => "pgf",
            Order::Germ => "germ",
        }
    }
}

impl FromStr for Order {
    type Err = OrderError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "st" => Ok(Order::Standard),
            "icv" => Ok(Order::IncreasingConcave),
            "pgf" => Ok(Order::Pgf),
            "germ" => Ok(Order::Germ),
            other => Err(OrderError::UnknownOrder(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    Less,
    Greater,
    Equal,
    Incomparable,
}

impl Relation {
    pub fn flip(self) -> Relation {
        match self {
            Relation::Less => Relation::Greater,
            Relation::Greater => Relation::Less,
            r => r,
        }
    }

    pub fn is_less_or_equal(self) -> bool {
        matches!(self, Relation::Less | Relation::Equal)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Relation::Less => "Less",
            Relation::Greater => "Greater",
            Relation::Equal => "Equal",
            Relation::Incomparable => "Incomparable",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// Cutoffs at which the defining functionals compare in opposite directions:
    /// `favors_mu` has μ's functional strictly larger, `favors_nu` has ν's.
    Cutoffs { favors_mu: u32, favors_nu: u32 },
    /// Rational points around a sign change of `P_μ − P_ν`.
    Crossing { below: Q, above: Q, sign_below: i8, root: f64 },
    /// First index where the factorial moments differ.
    MomentIndex(usize),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Cutoffs { favors_mu, favors_nu } => {
                write!(f, "cutoffs favoring mu at k={favors_mu}, favoring nu at k={favors_nu}")
            }
            Witness::Crossing { below, above, sign_below, root } => write!(
                f,
                "D changes sign near t={root:.12} (sign {sign_below:+} at {}, {:+} at {})",
                fmt_q(below),
                -sign_below,
                fmt_q(above)
            ),
            Witness::MomentIndex(k) => write!(f, "first differing factorial moment k*={k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderVerdict {
    pub relation: Relation,
    pub witness: Option<Witness>,
}

impl OrderVerdict {
    fn bare(relation: Relation) -> Self {
        OrderVerdict { relation, witness: None }
    }

    /// Re-checks the witness by direct evaluation; verdicts without one pass.
    pub fn witness_certifies(&self, mu: &OffspringDist, nu: &OffspringDist) -> bool {
        match &self.witness {
            None => true,
            Some(Witness::Cutoffs { favors_mu, favors_nu }) => {
                // Used by both st (CDF) and icv (truncated means); check whichever applies.
                let st_ok = cdf_at(mu, *favors_mu) < cdf_at(nu, *favors_mu)
                    && cdf_at(mu, *favors_nu) > cdf_at(nu, *favors_nu);
                let icv_ok = truncated_mean(mu, *favors_mu) > truncated_mean(nu, *favors_mu)
                    && truncated_mean(mu, *favors_nu) < truncated_mean(nu, *favors_nu);
                st_ok || icv_ok
            }
            Some(Witness::Crossing { below, above, sign_below, .. }) => {
                let d = pgf_difference(mu, nu);
                below < above && d.sign_at(below) == *sign_below && d.sign_at(above) == -*sign_below
            }
            Some(Witness::MomentIndex(k)) => {
                let fm = mu.factorial_moments(*k);
                let fn_ = nu.factorial_moments(*k);
                fm[..k - 1] == fn_[..k - 1] && fm[k - 1] != fn_[k - 1]
            }
        }
    }
}

/// `P_μ − P_ν`.
pub fn pgf_difference(mu: &OffspringDist, nu: &OffspringDist) -> Poly {
    &mu.pgf() - &nu.pgf()
}

fn cdf_at(d: &OffspringDist, k: u32) -> Q {
    d.atoms().iter().filter(|(o, _)| *o <= k).map(|(_, m)| m).sum()
}

/// `E[min(X, k)]`.
pub fn truncated_mean(d: &OffspringDist, k: u32) -> Q {
    d.atoms()
        .iter()
        .map(|(o, m)| m * Q::from_integer((*o).min(k).into()))
        .sum()
}

/// Classifies a pair of pointwise comparisons `lhs[i]` vs `rhs[i]` where
/// "μ smaller" corresponds to `lhs <= rhs` everywhere.
fn dominance(diffs: impl Iterator<Item = (u32, Q)>) -> OrderVerdict {
    let mut favors_mu = None;
    let mut favors_nu = None;
    for (k, diff) in diffs {
        match sign(&diff) {
            1 => {
                favors_mu.get_or_insert(k);
            }
            -1 => {
                favors_nu.get_or_insert(k);
            }
            _ => {}
        }
    }
    match (favors_mu, favors_nu) {
        (None, None) => OrderVerdict::bare(Relation::Equal),
        (None, Some(_)) => OrderVerdict::bare(Relation::Less),
        (Some(_), None) => OrderVerdict::bare(Relation::Greater),
        (Some(a), Some(b)) => OrderVerdict {
            relation: Relation::Incomparable,
            witness: Some(Witness::Cutoffs { favors_mu: a, favors_nu: b }),
        },
    }
}

/// Stochastic domination: `μ ≤_st ν` iff `F_μ(k) ≥ F_ν(k)` for every `k`.
pub fn compare_st(mu: &OffspringDist, nu: &OffspringDist) -> OrderVerdict {
    let top = mu.max_outcome().max(nu.max_outcome());
    // The functional here is P(X > k) = 1 - F(k); μ smaller means it is pointwise smaller.
    dominance((0..=top).map(|k| (k, cdf_at(nu, k) - cdf_at(mu, k))))
}

/// Increasing concave order, decided through the cutoff functions `x ↦ min(x, k)`,
/// which together with constants generate every increasing concave function on a
/// finite integer range.
pub fn compare_icv(mu: &OffspringDist, nu: &OffspringDist) -> OrderVerdict {
    let top = mu.max_outcome().max(nu.max_outcome()).max(1);
    dominance((1..=top).map(|k| (k, truncated_mean(mu, k) - truncated_mean(nu, k))))
}

/// Sign structure of a nonzero polynomial on the open interval `(0, 1)`.
enum SignOnUnit {
    /// Never changes sign; carries the sign away from its roots.
    Constant(i8),
    /// Changes sign; carries the isolated crossing closest to 1.
    Crossing(RootInterval),
}

fn sign_on_unit_interval(d: &Poly) -> SignOnUnit {
    let odd = d.odd_multiplicity_part();
    let sturm = SturmChain::new(&odd);
    let mut crossings = sturm.isolate(&Q::zero(), &Q::one());
    if odd.sign_at(&Q::one()) == 0 {
        crossings.pop();
    }
    match crossings.pop() {
        Some(iv) => SignOnUnit::Crossing(sturm.refine(&iv, &Q::new(1.into(), (1u64 << 44).into()))),
        None => SignOnUnit::Constant(sign_somewhere(d)),
    }
}

/// Sign of `d` at some point of `(0, 1)` where it does not vanish.
fn sign_somewhere(d: &Poly) -> i8 {
    let mut den: i64 = 2;
    loop {
        for num in 1..den {
            if num % 2 == 1 || den == 2 {
                let s = d.sign_at(&Q::new(num.into(), den.into()));
                if s != 0 {
                    return s;
                }
            }
        }
        den *= 2;
    }
}

/// Rational points strictly on either side of an isolated sign change.
fn crossing_witness(d: &Poly, iv: &RootInterval) -> Witness {
    let width = Q::new(1.into(), (1u64 << 20).into());
    let (mut below, mut above) = if iv.is_exact() {
        (&iv.lo - &width, &iv.hi + &width)
    } else {
        (iv.lo.clone(), iv.hi.clone())
    };
    // Shrink the offsets until no other root sits between the probes and the crossing.
    let mut step = width;
    while d.sign_at(&below) == 0 || d.sign_at(&above) == 0 || d.sign_at(&below) == d.sign_at(&above) {
        step /= Q::from_integer(2.into());
        below = &iv.lo - &step;
        above = &iv.hi + &step;
    }
    Witness::Crossing {
        sign_below: d.sign_at(&below),
        below,
        above,
        root: iv.midpoint_f64(),
    }
}

/// Laplace-transform (pgf) order on `[0, 1]`.
pub fn compare_pgf(mu: &OffspringDist, nu: &OffspringDist) -> OrderVerdict {
    let d = pgf_difference(mu, nu);
    if d.is_zero() {
        return OrderVerdict::bare(Relation::Equal);
    }
    match sign_on_unit_interval(&d) {
        SignOnUnit::Constant(1) => OrderVerdict::bare(Relation::Less),
        SignOnUnit::Constant(_) => OrderVerdict::bare(Relation::Greater),
        SignOnUnit::Crossing(iv) => OrderVerdict {
            relation: Relation::Incomparable,
            witness: Some(crossing_witness(&d, &iv)),
        },
    }
}

/// Germ order through the first differing factorial moment: at odd `k*` the
/// smaller moment is smaller in the order, at even `k*` the larger one is.
/// Distinct finite-support laws are always comparable.
pub fn compare_germ(mu: &OffspringDist, nu: &OffspringDist) -> OrderVerdict {
    let k_max = mu.max_outcome().max(nu.max_outcome()) as usize;
    if mu == nu {
        return OrderVerdict::bare(Relation::Equal);
    }
    let fm = mu.factorial_moments(k_max.max(1));
    let fn_ = nu.factorial_moments(k_max.max(1));
    let (idx, (a, b)) = fm
        .iter()
        .zip(&fn_)
        .enumerate()
        .find(|(_, (a, b))| a != b)
        .expect("distinct distributions share all factorial moments up to their degree");
    let k_star = idx + 1;
    // D(1 - h) ≈ (-1)^k* (f_k*(μ) - f_k*(ν)) h^k* / k*!; μ is smaller when this is positive.
    let leading = if k_star % 2 == 1 { b - a } else { a - b };
    let relation = if sign(&leading) > 0 { Relation::Less } else { Relation::Greater };
    OrderVerdict { relation, witness: Some(Witness::MomentIndex(k_star)) }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GermThreshold {
    /// `P_μ ≥ P_ν` holds on `[alpha, 1]`.
    pub alpha: Q,
    /// `alpha` is the exact infimum of valid thresholds.
    pub tight: bool,
    /// Float estimate of the underlying crossing (0 when there is none).
    pub root: f64,
}

impl GermThreshold {
    pub fn alpha_f64(&self) -> f64 {
        to_f64(&self.alpha)
    }
}

/// Smallest threshold `alpha < 1` such that `P_μ ≥ P_ν` on `[alpha, 1]`, rounded up to
/// a rational with denominator [`THRESHOLD_DENOMINATOR`] when the crossing is irrational.
pub fn germ_threshold(mu: &OffspringDist, nu: &OffspringDist) -> Result<GermThreshold, OrderError> {
    let verdict = compare_germ(mu, nu);
    if verdict.relation != Relation::Less {
        return Err(OrderError::NotGermLess(verdict.relation));
    }
    let d = pgf_difference(mu, nu);
    let out = match sign_on_unit_interval(&d) {
        SignOnUnit::Constant(_) => GermThreshold { alpha: Q::zero(), tight: false, root: 0.0 },
        SignOnUnit::Crossing(iv) if iv.is_exact() => {
            GermThreshold { root: to_f64(&iv.lo), alpha: iv.lo, tight: true }
        }
        SignOnUnit::Crossing(iv) => {
            let mut den = THRESHOLD_DENOMINATOR;
            let mut alpha = ceil_to_denominator(&iv.hi, den);
            while alpha >= Q::one() {
                den *= 1000;
                alpha = ceil_to_denominator(&iv.hi, den);
            }
            GermThreshold { alpha, tight: false, root: iv.midpoint_f64() }
        }
    };
    if !certify_threshold(mu, nu, &out.alpha) {
        return Err(OrderError::AlphaInvalid(fmt_q(&out.alpha)));
    }
    Ok(out)
}

/// Exact check that `P_μ(t) ≥ P_ν(t)` for every `t` in `[alpha, 1]`.
pub fn certify_threshold(mu: &OffspringDist, nu: &OffspringDist, alpha: &Q) -> bool {
    if *alpha < Q::zero() || *alpha >= Q::one() {
        return false;
    }
    let d = pgf_difference(mu, nu);
    if d.is_zero() {
        return true;
    }
    if d.sign_at(alpha) < 0 {
        return false;
    }
    let odd = d.odd_multiplicity_part();
    let sturm = SturmChain::new(&odd);
    let mut n = sturm.count_roots(alpha, &Q::one());
    if odd.sign_at(&Q::one()) == 0 {
        n -= 1;
    }
    if n > 0 {
        return false;
    }
    // No sign change on (alpha, 1): the sign there is that of any non-root point.
    let two = Q::from_integer(2.into());
    let mut probe = (alpha + Q::one()) / &two;
    while d.sign_at(&probe) == 0 {
        probe = (alpha + &probe) / &two;
    }
    d.sign_at(&probe) > 0
}

/// Number of sign changes of `P_μ − P_ν` strictly inside `(alpha, 1)`.
pub fn crossings_above(mu: &OffspringDist, nu: &OffspringDist, alpha: &Q) -> usize {
    let d = pgf_difference(mu, nu);
    if d.is_zero() {
        return 0;
    }
    let odd = d.odd_multiplicity_part();
    let sturm = SturmChain::new(&odd);
    let n = sturm.count_roots(alpha, &Q::one());
    if odd.sign_at(&Q::one()) == 0 { n - 1 } else { n }
}

impl fmt::Display for OrderVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.relation)?;
        if let Some(w) = &self.witness {
            write!(f, " ({w})")?;
        }
        Ok(())
    }
}

impl Default for GermThreshold {
    fn default() -> Self {
        GermThreshold { alpha: Q::zero(), tight: false, root: 0.0 }
    }
}
