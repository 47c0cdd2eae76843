//! Estimates, confidence intervals and three-valued verdicts.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::rng::SeedSpec;

pub const DEFAULT_CONFIDENCE: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

/// What an estimate claims about the underlying quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bias {
    Unbiased,
    /// Estimates a quantity no larger than the target (finite candidate set for a sup).
    LowerBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: u64,
    pub seed: Option<SeedSpec>,
    pub method: Method,
    pub bias: Bias,
}

impl McEstimate {
    pub fn exact(p: f64) -> Self {
        Self { p_hat: p, ci_low: p, ci_high: p, samples: 0, seed: None, method: Method::Exact, bias: Bias::Unbiased }
    }

    /// Binomial proportion with a Clopper–Pearson interval.
    pub fn binomial(successes: u64, trials: u64, seed: Option<SeedSpec>, confidence: f64) -> Self {
        let (lo, hi) = clopper_pearson(successes, trials, confidence);
        let p = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
        Self { p_hat: p, ci_low: lo, ci_high: hi, samples: trials, seed, method: Method::MonteCarlo, bias: Bias::Unbiased }
    }

    /// Mean of variables in `[0, range]` with an empirical-Bernstein interval.
    pub fn bounded_mean(sum: f64, sum_sq: f64, n: u64, range: f64, seed: Option<SeedSpec>, confidence: f64) -> Self {
        let nf = n as f64;
        let mean = if n == 0 { 0.0 } else { sum / nf };
        let half = if n < 2 {
            range
        } else {
            let var = ((sum_sq - sum * sum / nf) / (nf - 1.0)).max(0.0);
            let l = (4.0 / (1.0 - confidence)).ln();
            (2.0 * var * l / nf).sqrt() + 7.0 * range * l / (3.0 * (nf - 1.0))
        };
        Self {
            p_hat: mean,
            ci_low: (mean - half).max(0.0),
            ci_high: (mean + half).min(range),
            samples: n,
            seed,
            method: Method::MonteCarlo,
            bias: Bias::Unbiased,
        }
    }

    pub fn interval(&self) -> Interval {
        Interval { lo: self.ci_low, hi: self.ci_high }
    }

    pub fn as_lower_bound(mut self) -> Self {
        self.bias = Bias::LowerBound;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn map_monotone(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { lo: f(self.lo), hi: f(self.hi) }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Exact binomial interval by bisection on the regularized incomplete beta function.
pub fn clopper_pearson(k: u64, n: u64, confidence: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let alpha = 1.0 - confidence;
    let (kf, nf) = (k as f64, n as f64);
    let lo = if k == 0 { 0.0 } else { beta_quantile(kf, nf - kf + 1.0, alpha / 2.0) };
    let hi = if k == n { 1.0 } else { beta_quantile(kf + 1.0, nf - kf, 1.0 - alpha / 2.0) };
    (lo, hi)
}

fn beta_quantile(a: f64, b: f64, q: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Wilson score interval.
pub fn wilson(k: u64, n: u64, confidence: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = crate::numerics::std_normal_quantile(0.5 + confidence / 2.0);
    let nf = n as f64;
    let p = k as f64 / nf;
    let denom = 1.0 + z * z / nf;
    let centre = (p + z * z / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
    /// The bound is ≥ 1 (or otherwise trivially true) so nothing is tested.
    Vacuous,
    PreconditionsUnmet,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Vacuous => "vacuous",
            Verdict::PreconditionsUnmet => "preconditions-unmet",
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, Verdict::Violated)
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Verdict for `lhs ≤ rhs` from two intervals: certain only when they separate.
pub fn verdict_le(lhs: Interval, rhs: Interval) -> Verdict {
    if lhs.hi <= rhs.lo {
        Verdict::Holds
    } else if lhs.lo > rhs.hi {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    }
}

/// As [`verdict_le`] for a probability bounded by `rhs`; a right side of at least one is vacuous.
pub fn verdict_prob_le(lhs: Interval, rhs: Interval) -> Verdict {
    if rhs.lo >= 1.0 {
        Verdict::Vacuous
    } else {
        verdict_le(lhs, rhs)
    }
}

/// Pointwise check with an absolute tolerance.
pub fn verdict_exact_le(lhs: f64, rhs: f64, tol: f64) -> Verdict {
    if lhs <= rhs + tol {
        Verdict::Holds
    } else {
        Verdict::Violated
    }
}

/// Combines verdicts: any violation wins, then inconclusive, then holds/vacuous.
pub fn combine(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
    let mut out = Verdict::Vacuous;
    let mut any = false;
    for v in verdicts {
        any = true;
        out = match (out, v) {
            (Verdict::Violated, _) | (_, Verdict::Violated) => Verdict::Violated,
            (Verdict::PreconditionsUnmet, _) | (_, Verdict::PreconditionsUnmet) => Verdict::PreconditionsUnmet,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            (Verdict::Holds, _) | (_, Verdict::Holds) => Verdict::Holds,
            _ => Verdict::Vacuous,
        };
    }
    if any { out } else { Verdict::Inconclusive }
}
