//! Arithmetic backends for the recursion engines.
//!
//! All engine quantities live in `[0, 1]`, so multiplication is only ever applied
//! to nonnegative operands. Two backends exist:
//!
//! * `f64`: inequality checks allow a slack of [`FLOAT_TOL`].
//! * [`Exact`]: rational enclosures `[lo, hi]`. Values stay exact points until a
//!   denominator grows past [`EXACT_PRECISION_BITS`] significant bits; from then on
//!   the endpoints are rounded outward to dyadic rationals with that many
//!   significant bits, so every stored enclosure still contains the true value and
//!   inequality checks remain proofs.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{fmt_q, to_f64, Q};

/// Slack allowed in floating-point inequality checks.
pub const FLOAT_TOL: f64 = 1e-12;

/// Significant bits kept when exact enclosures are rounded outward.
pub const EXACT_PRECISION_BITS: u64 = 192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ArithmeticMode {
    #[default]
    Float,
    Exact,
}

impl std::str::FromStr for ArithmeticMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "float" => Ok(ArithmeticMode::Float),
            "exact" => Ok(ArithmeticMode::Exact),
            other => Err(format!("unknown arithmetic mode `{other}` (expected exact or float)")),
        }
    }
}

impl fmt::Display for ArithmeticMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArithmeticMode::Float => "float",
            ArithmeticMode::Exact => "exact",
        })
    }
}

/// Outcome of checking `a ≥ b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margin {
    /// Best estimate of `a − b`.
    pub estimate: f64,
    /// `a ≥ b` is established (within [`FLOAT_TOL`] in float mode).
    pub holds: bool,
    /// `a < b` is established.
    pub violated: bool,
}

impl Margin {
    pub fn undecided(&self) -> bool {
        !self.holds && !self.violated
    }
}

pub trait Scalar: Clone + fmt::Debug + Send + Sync + 'static {
    const MODE: ArithmeticMode;

    fn from_q(q: &Q) -> Self;
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    /// Product of two nonnegative values.
    fn mul(&self, other: &Self) -> Self;
    fn min(&self, other: &Self) -> Self;
    fn max(&self, other: &Self) -> Self;
    fn to_f64(&self) -> f64;
    /// Upper bound on `|self − other|` as a float.
    fn dist(&self, other: &Self) -> f64;
    /// Checks `a ≥ b`.
    fn ge(a: &Self, b: &Self) -> Margin;
    /// Exact rational value when known.
    fn exact(&self) -> Option<Q>;
    /// Exact textual form (`p/q`, or an enclosure `[lo,hi]`), `None` in float mode.
    fn exact_repr(&self) -> Option<String>;
}

impl Scalar for f64 {
    const MODE: ArithmeticMode = ArithmeticMode::Float;

    fn from_q(q: &Q) -> Self {
        to_f64(q)
    }
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn min(&self, other: &Self) -> Self {
        f64::min(*self, *other)
    }
    fn max(&self, other: &Self) -> Self {
        f64::max(*self, *other)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn dist(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
    fn ge(a: &Self, b: &Self) -> Margin {
        let d = a - b;
        Margin { estimate: d, holds: d >= -FLOAT_TOL, violated: d < -FLOAT_TOL }
    }
    fn exact(&self) -> Option<Q> {
        None
    }
    fn exact_repr(&self) -> Option<String> {
        None
    }
}

/// Rational enclosure `lo ≤ value ≤ hi`.
#[derive(Clone, PartialEq, Eq)]
pub struct Exact {
    lo: Q,
    hi: Q,
}

impl Exact {
    pub fn point(q: Q) -> Self {
        Exact { lo: q.clone(), hi: q }
    }

    pub fn lo(&self) -> &Q {
        &self.lo
    }

    pub fn hi(&self) -> &Q {
        &self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    fn rounded(lo: Q, hi: Q) -> Self {
        Exact { lo: round_down(lo), hi: round_up(hi) }
    }
}

/// Magnitudes below `2^-EXACT_MIN_EXPONENT` share one absolute grid, which bounds
/// the size of stored endpoints.
pub const EXACT_MIN_EXPONENT: u64 = 1024;

/// Bits of the dyadic grid used for `x`: [`EXACT_PRECISION_BITS`] significant bits,
/// so small values keep their relative precision down to `2^-EXACT_MIN_EXPONENT`.
fn grid_bits(x: &Q) -> u64 {
    let magnitude = x.numer().magnitude().bits();
    EXACT_PRECISION_BITS + x.denom().bits().saturating_sub(magnitude).min(EXACT_MIN_EXPONENT)
}

fn needs_rounding(x: &Q) -> bool {
    x.denom().bits() > grid_bits(x) + 1
}

fn round_down(x: Q) -> Q {
    if !needs_rounding(&x) {
        return x;
    }
    let s = BigInt::one() << grid_bits(&x);
    Q::new((x * Q::from_integer(s.clone())).floor().to_integer(), s)
}

fn round_up(x: Q) -> Q {
    if !needs_rounding(&x) {
        return x;
    }
    let s = BigInt::one() << grid_bits(&x);
    Q::new((x * Q::from_integer(s.clone())).ceil().to_integer(), s)
}

impl fmt::Debug for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            write!(f, "{}", fmt_q(&self.lo))
        } else {
            write!(f, "[{:.20e}, {:.20e}]", to_f64(&self.lo), to_f64(&self.hi))
        }
    }
}

impl Scalar for Exact {
    const MODE: ArithmeticMode = ArithmeticMode::Exact;

    fn from_q(q: &Q) -> Self {
        Exact::point(q.clone())
    }
    fn zero() -> Self {
        Exact::point(Q::zero())
    }
    fn one() -> Self {
        Exact::point(Q::one())
    }
    fn add(&self, other: &Self) -> Self {
        Exact::rounded(&self.lo + &other.lo, &self.hi + &other.hi)
    }
    fn mul(&self, other: &Self) -> Self {
        debug_assert!(!self.lo.is_negative() && !other.lo.is_negative());
        Exact::rounded(&self.lo * &other.lo, &self.hi * &other.hi)
    }
    // A clearly smaller (larger) operand is returned unchanged, so that values
    // produced by the same operations keep identical enclosures.
    fn min(&self, other: &Self) -> Self {
        if self.hi <= other.lo {
            self.clone()
        } else if other.hi <= self.lo {
            other.clone()
        } else {
            Exact { lo: (&self.lo).min(&other.lo).clone(), hi: (&self.hi).min(&other.hi).clone() }
        }
    }
    fn max(&self, other: &Self) -> Self {
        if self.lo >= other.hi {
            self.clone()
        } else if other.lo >= self.hi {
            other.clone()
        } else {
            Exact { lo: (&self.lo).max(&other.lo).clone(), hi: (&self.hi).max(&other.hi).clone() }
        }
    }
    fn to_f64(&self) -> f64 {
        if self.is_point() {
            to_f64(&self.lo)
        } else {
            0.5 * (to_f64(&self.lo) + to_f64(&self.hi))
        }
    }
    fn dist(&self, other: &Self) -> f64 {
        let a = (&self.hi - &other.lo).abs();
        let b = (&other.hi - &self.lo).abs();
        to_f64(&a.max(b))
    }
    fn ge(a: &Self, b: &Self) -> Margin {
        let low = &a.lo - &b.hi;
        let high = &a.hi - &b.lo;
        Margin {
            estimate: a.to_f64() - b.to_f64(),
            holds: !low.is_negative(),
            violated: high.is_negative(),
        }
    }
    fn exact(&self) -> Option<Q> {
        self.is_point().then(|| self.lo.clone())
    }
    fn exact_repr(&self) -> Option<String> {
        Some(if self.is_point() {
            fmt_q(&self.lo)
        } else {
            format!("[{},{}]", fmt_q(&self.lo), fmt_q(&self.hi))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn exact_stays_exact_for_small_denominators() {
        let a = Exact::from_q(&q(1, 3));
        let b = a.mul(&a).add(&a);
        assert_eq!(b.exact(), Some(q(4, 9)));
        assert_eq!(b.exact_repr().unwrap(), "4/9");
    }

    #[test]
    fn rounding_keeps_the_true_value_enclosed() {
        let third = Exact::from_q(&q(1, 3));
        let mut x = third.clone();
        let mut exact = q(1, 3);
        for _ in 0..8 {
            x = x.mul(&x).add(&third);
            exact = &exact * &exact + q(1, 3);
        }
        assert!(!x.is_point());
        assert!(x.lo() <= &exact && &exact <= x.hi());
        assert!(x.dist(&Exact::point(exact)) < 1e-50);
    }

    #[test]
    fn margins() {
        let m = <f64 as Scalar>::ge(&0.5, &(0.5 + 1e-13));
        assert!(m.holds && !m.violated);
        let m = <f64 as Scalar>::ge(&0.5, &0.6);
        assert!(m.violated);
        let a = Exact { lo: q(1, 4), hi: q(1, 2) };
        let b = Exact::point(q(1, 3));
        assert!(<Exact as Scalar>::ge(&a, &b).undecided());
        assert!(<Exact as Scalar>::ge(&Exact::point(q(1, 2)), &b).holds);
        assert!(<Exact as Scalar>::ge(&b, &Exact::point(q(1, 2))).violated);
    }
}
