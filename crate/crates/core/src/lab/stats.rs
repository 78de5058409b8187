//! Estimates with standard errors and the two-arm decision rule.

use serde::Serialize;

/// Standard errors allowed by the two-arm decision rule.
pub const DECISION_SES: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: u64,
}

impl Estimate {
    /// Sample mean with the standard error of the mean; an empty sample gives
    /// `mean = 0`, `se = 0`, `n = 0`.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Estimate { mean: 0.0, se: 0.0, n: 0 };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let se = if n > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Estimate { mean, se, n: n as u64 }
    }

    /// Binomial proportion `hits / n`.
    pub fn proportion(hits: u64, n: u64) -> Self {
        if n == 0 {
            return Estimate { mean: 0.0, se: 0.0, n: 0 };
        }
        let p = hits as f64 / n as f64;
        Estimate { mean: p, se: (p * (1.0 - p) / n as f64).sqrt(), n }
    }

    /// Exact value (engine quantities).
    pub fn exact(value: f64) -> Self {
        Estimate { mean: value, se: 0.0, n: 1 }
    }
}

/// Margin of "`upper` is not below `lower`" under the decision rule:
/// `(upper − lower) + DECISION_SES · √(se_u² + se_l²)`; nonnegative means consistent.
pub fn dominance_margin(upper: &Estimate, lower: &Estimate) -> f64 {
    (upper.mean - lower.mean) + DECISION_SES * upper.se.hypot(lower.se)
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
