//! Exact rational helpers shared by the distribution, order, and engine code.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Q = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("malformed rational literal `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.125` or `-1.5e-2`,
/// converting decimals exactly (no binary floating point in between).
pub fn parse_rational(s: &str) -> Result<Q, ParseRationalError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| ParseRationalError::Malformed(s.to_string()))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| ParseRationalError::Malformed(s.to_string()))?;
        if d.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(s.to_string()));
        }
        return Ok(Q::new(n, d));
    }
    parse_decimal(s).ok_or_else(|| ParseRationalError::Malformed(s.to_string()))
}

fn parse_decimal(s: &str) -> Option<Q> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let n: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().ok()? };
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = Q::from_integer(n);
    if scale >= 0 {
        r *= Q::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= Q::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -r } else { r })
}

pub fn to_f64(x: &Q) -> f64 {
    // BigRational::to_f64 handles huge numerators/denominators without overflow.
    x.to_f64().unwrap_or_else(|| {
        let n = x.numer().bits() as i64;
        let d = x.denom().bits() as i64;
        if n - d > 1000 {
            if x.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY }
        } else {
            0.0
        }
    })
}

/// Exact conversion of a finite f64 into a rational.
pub fn from_f64(x: f64) -> Option<Q> {
    Q::from_float(x)
}

pub fn pow(x: &Q, k: u32) -> Q {
    num_traits::pow(x.clone(), k as usize)
}

/// Smallest `a/den` (with the given denominator) that is `>= x`.
pub fn ceil_to_denominator(x: &Q, den: u64) -> Q {
    let d = BigInt::from(den);
    let scaled = x * Q::from_integer(d.clone());
    Q::new(scaled.ceil().to_integer(), d)
}

/// Largest `a/den` that is `<= x`.
pub fn floor_to_denominator(x: &Q, den: u64) -> Q {
    let d = BigInt::from(den);
    let scaled = x * Q::from_integer(d.clone());
    Q::new(scaled.floor().to_integer(), d)
}

/// The rational with the smallest denominator in the closed interval `[lo, hi]`
/// (Stern–Brocot descent via continued fractions). Requires `lo <= hi`.
pub fn simplest_between(lo: &Q, hi: &Q) -> Q {
    debug_assert!(lo <= hi);
    if lo.is_negative() && hi.is_positive() || lo.is_zero() || hi.is_zero() {
        return Q::zero();
    }
    if hi.is_negative() {
        return -simplest_between(&-hi.clone(), &-lo.clone());
    }
    let fl = lo.floor();
    if &fl == lo {
        return lo.clone();
    }
    if fl.clone() + Q::one() <= *hi {
        return fl + Q::one();
    }
    // lo and hi share the integer part; recurse on the reciprocals of the fractional parts.
    let a = fl.clone();
    let lo_f = lo - &a;
    let hi_f = hi - &a;
    let inner = simplest_between(&hi_f.recip(), &lo_f.recip());
    a + inner.recip()
}

pub fn lcm_of_denominators<'a>(xs: impl IntoIterator<Item = &'a Q>) -> BigInt {
    xs.into_iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_integers_and_decimals() {
        assert_eq!(parse_rational("3/4").unwrap(), q(3, 4));
        assert_eq!(parse_rational(" 2 ").unwrap(), qi(2));
        assert_eq!(parse_rational("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_rational("0.1").unwrap(), q(1, 10));
        assert_eq!(parse_rational("1.5e-1").unwrap(), q(3, 20));
        assert_eq!(parse_rational(".5").unwrap(), q(1, 2));
        assert_eq!(parse_rational("-2.5").unwrap(), q(-5, 2));
    }

    #[test]
    fn rejects_bad_literals() {
        assert!(matches!(parse_rational(""), Err(ParseRationalError::Empty)));
        assert!(matches!(parse_rational("1/0"), Err(ParseRationalError::ZeroDenominator(_))));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.2.3").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn simplest_rational_finds_small_denominators() {
        assert_eq!(simplest_between(&q(33, 100), &q(34, 100)), q(1, 3));
        assert_eq!(simplest_between(&q(1, 3), &q(1, 3)), q(1, 3));
        assert_eq!(simplest_between(&q(3, 10), &q(7, 10)), q(1, 2));
        assert_eq!(simplest_between(&q(5, 4), &q(7, 4)), qi(2) - q(1, 2));
    }

    #[test]
    fn directed_rounding_to_denominator() {
        let third = q(1, 3);
        assert_eq!(ceil_to_denominator(&third, 1_000_000), q(333_334, 1_000_000));
        assert_eq!(floor_to_denominator(&third, 1_000_000), q(333_333, 1_000_000));
        assert_eq!(ceil_to_denominator(&q(1, 2), 10), q(1, 2));
    }
}
