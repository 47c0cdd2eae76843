//! Singularity probability of symmetric ±1 matrices: exhaustive counts, Monte
//! Carlo estimates and a weighted exponential fit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, LabError, Result};
use crate::mc::mc_count;
use crate::numerics::special::std_normal_quantile;
use crate::rng::SeedSpec;
use crate::sample::SignSymMatrix;
use crate::stats::{clopper_pearson, Interval, McEstimate, DEFAULT_CONFIDENCE};

pub const EXHAUSTIVE_MAX_N: usize = 6;
pub const MC_MAX_N: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveMethod {
    Exhaustive,
    MonteCarlo,
}

impl CurveMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            CurveMethod::Exhaustive => "exhaustive",
            CurveMethod::MonteCarlo => "monte-carlo",
        }
    }
}

/// Exact count of singular matrices among all 2^{n(n+1)/2} symmetric sign matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactFraction {
    pub singular: u64,
    pub total: u64,
}

impl ExactFraction {
    pub fn value(&self) -> f64 {
        self.singular as f64 / self.total as f64
    }
}

pub fn singularity_exhaustive(n: usize) -> Result<ExactFraction> {
    ensure(n >= 1, || "n must be ≥ 1".into())?;
    if n > EXHAUSTIVE_MAX_N {
        return Err(LabError::EnumerationCap { dim: n, cap: EXHAUSTIVE_MAX_N });
    }
    let total = 1u64 << (n * (n + 1) / 2);
    let block = 1u64 << 12;
    let singular = (0..total.div_ceil(block))
        .into_par_iter()
        .map(|b| (b * block..((b + 1) * block).min(total)).filter(|&c| SignSymMatrix::from_code(n, c).is_singular()).count() as u64)
        .sum();
    Ok(ExactFraction { singular, total })
}

fn singular_count(n: usize, budget: u64, seed: &SeedSpec) -> Result<u64> {
    ensure((1..=MC_MAX_N).contains(&n), || format!("n={n} outside [1, {MC_MAX_N}]"))?;
    ensure(budget >= 1, || "budget must be ≥ 1".into())?;
    Ok(mc_count(seed, budget, || (), |rng, _| SignSymMatrix::sample(n, rng).is_singular()))
}

pub fn singularity_mc(n: usize, budget: u64, seed: &SeedSpec) -> Result<McEstimate> {
    let k = singular_count(n, budget, seed)?;
    Ok(McEstimate::binomial(k, budget, Some(seed.clone()), DEFAULT_CONFIDENCE))
}

/// One CSV row: n, method, count, total, p_hat, ci_low, ci_high, seed, samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub n: usize,
    pub method: CurveMethod,
    pub count: u64,
    pub total: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: Option<SeedSpec>,
    pub samples: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularityCurve {
    pub rows: Vec<CurveRow>,
}

/// Rows for strictly increasing `ns`; each MC point gets its own child stream.
pub fn singularity_curve(ns: &[usize], method: CurveMethod, budget: u64, seed: &SeedSpec) -> Result<SingularityCurve> {
    ensure(ns.windows(2).all(|w| w[0] < w[1]), || "n values must be strictly increasing".into())?;
    let rows = ns
        .iter()
        .map(|&n| match method {
            CurveMethod::Exhaustive => {
                let f = singularity_exhaustive(n)?;
                let p = f.value();
                Ok(CurveRow { n, method, count: f.singular, total: f.total, p_hat: p, ci_low: p, ci_high: p, seed: None, samples: f.total })
            }
            CurveMethod::MonteCarlo => {
                let s = seed.child(format!("n{n}"));
                let count = singular_count(n, budget, &s)?;
                let e = McEstimate::binomial(count, budget, Some(s.clone()), DEFAULT_CONFIDENCE);
                Ok(CurveRow { n, method, count, total: budget, p_hat: e.p_hat, ci_low: e.ci_low, ci_high: e.ci_high, seed: Some(s), samples: budget })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SingularityCurve { rows })
}

/// 2n²2^{−n}, used only as a plausibility band.
pub fn conjectured_rate(n: usize) -> f64 {
    2.0 * (n * n) as f64 * 2f64.powi(-(n as i32))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Weighted residual sum of squares.
    pub residual: f64,
    pub window: (usize, usize),
    /// Normal-theory interval from the known per-point variances.
    pub slope_ci: Interval,
    pub points: usize,
}

/// Weighted least squares of y on x.
pub fn weighted_line_fit(points: &[(f64, f64, f64)]) -> Result<(f64, f64, f64, f64)> {
    ensure(points.len() >= 2, || "need at least two points".into())?;
    let sw: f64 = points.iter().map(|p| p.2).sum();
    let mx = points.iter().map(|p| p.2 * p.0).sum::<f64>() / sw;
    let my = points.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = points.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    ensure(sxx > 0.0, || "x values are all equal".into())?;
    let sxy: f64 = points.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss = points.iter().map(|p| p.2 * (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok((slope, intercept, rss, (1.0 / sxx).sqrt()))
}

/// Fit log p̂_n = a + b·n over rows in `window` with a nonzero lower CI.
/// Weights are 1/Var(log p̂) ≈ count/(1 − p̂).
pub fn fit_exponential(curve: &SingularityCurve, window: (usize, usize)) -> Result<FitResult> {
    let pts: Vec<(f64, f64, f64)> = curve
        .rows
        .iter()
        .filter(|r| r.n >= window.0 && r.n <= window.1 && r.count > 0 && r.ci_low > 0.0 && r.p_hat < 1.0)
        .map(|r| (r.n as f64, r.p_hat.ln(), r.count as f64 / (1.0 - r.p_hat)))
        .collect();
    ensure(pts.len() >= 4, || format!("only {} conclusive rows in window {window:?}; need 4", pts.len()))?;
    let (slope, intercept, residual, se) = weighted_line_fit(&pts)?;
    let z = std_normal_quantile(0.5 + DEFAULT_CONFIDENCE / 2.0);
    Ok(FitResult { slope, intercept, residual, window, slope_ci: Interval::new(slope - z * se, slope + z * se), points: pts.len() })
}

/// Whether every MC p̂ lies within [0.25×, 4×] of 2n²2^{−n}.
pub fn within_plausibility_band(row: &CurveRow) -> bool {
    let c = conjectured_rate(row.n);
    row.p_hat >= 0.25 * c && row.p_hat <= 4.0 * c
}

/// Exact binomial interval of a curve row, recomputed from its counts.
pub fn row_interval(row: &CurveRow) -> Interval {
    match row.method {
        CurveMethod::Exhaustive => Interval::point(row.p_hat),
        CurveMethod::MonteCarlo => {
            let (lo, hi) = clopper_pearson(row.count, row.total, DEFAULT_CONFIDENCE);
            Interval::new(lo, hi)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::exact::{exact_det, IntMatrix};

    #[test]
    fn tiny_cases() {
        assert_eq!(singularity_exhaustive(1).unwrap(), ExactFraction { singular: 0, total: 2 });
        assert_eq!(singularity_exhaustive(2).unwrap().value(), 0.5);
        assert!(singularity_exhaustive(7).is_err());
    }

    /// Independent oracle: Bareiss determinant on every matrix.
    #[test]
    fn exhaustive_matches_bareiss() {
        for n in 1..=4 {
            let total = 1u64 << (n * (n + 1) / 2);
            let sing = (0..total)
                .filter(|&c| {
                    let a = SignSymMatrix::from_code(n, c);
                    exact_det(&IntMatrix::from_i64(n, n, &a.to_i64()).unwrap()).unwrap() == 0.into()
                })
                .count() as u64;
            assert_eq!(singularity_exhaustive(n).unwrap().singular, sing);
        }
    }

    #[test]
    fn mc_agrees_with_exhaustive() {
        for n in [2usize, 4, 5] {
            let exact = singularity_exhaustive(n).unwrap().value();
            let e = singularity_mc(n, 100_000, &SeedSpec::new(n as u64, "sing")).unwrap();
            assert!(e.ci_low <= exact && exact <= e.ci_high, "n={n}: {exact} vs {e:?}");
        }
    }

    fn synthetic(f: impl Fn(usize) -> f64) -> SingularityCurve {
        let rows = (4..=20)
            .map(|n| {
                let p = f(n);
                let total = 1u64 << 40;
                CurveRow { n, method: CurveMethod::MonteCarlo, count: (p * total as f64) as u64, total, p_hat: p, ci_low: p * 0.99, ci_high: p * 1.01, seed: None, samples: total }
            })
            .collect();
        SingularityCurve { rows }
    }

    #[test]
    fn fit_recovers_pure_exponential() {
        let c = synthetic(|n| 2f64.powi(-(n as i32)));
        let f = fit_exponential(&c, (4, 20)).unwrap();
        assert!((f.slope + 2f64.ln()).abs() < 1e-12);
        assert!(f.residual < 1e-12);
    }

    /// Closed-form unweighted fit of log(n²2^{−n}) on n: slope = −ln 2 + 2·cov(ln n, n)/var(n).
    #[test]
    fn line_fit_matches_closed_form() {
        let xs: Vec<f64> = (8..=16).map(|n| n as f64).collect();
        let pts: Vec<(f64, f64, f64)> = xs.iter().map(|&x| (x, 2.0 * x.ln() - x * 2f64.ln(), 1.0)).collect();
        let (slope, _, _, _) = weighted_line_fit(&pts).unwrap();
        let m = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / m;
        let ml = xs.iter().map(|x| x.ln()).sum::<f64>() / m;
        let cov = xs.iter().map(|x| (x - mx) * (x.ln() - ml)).sum::<f64>();
        let var = xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!((slope - (-2f64.ln() + 2.0 * cov / var)).abs() < 1e-12);
        // and the slope approaches −ln 2 as the window grows
        let wide: Vec<(f64, f64, f64)> = (8..=400).map(|n| { let x = n as f64; (x, 2.0 * x.ln() - x * 2f64.ln(), 1.0) }).collect();
        let (s2, _, _, _) = weighted_line_fit(&wide).unwrap();
        assert!((s2 + 2f64.ln()).abs() < (slope + 2f64.ln()).abs());
    }

    #[test]
    fn fit_needs_four_rows() {
        let c = synthetic(|n| 2f64.powi(-(n as i32)));
        assert!(fit_exponential(&c, (4, 6)).is_err());
    }

    #[test]
    fn curve_rows() {
        let c = singularity_curve(&[2, 3, 4], CurveMethod::Exhaustive, 0, &SeedSpec::new(0, "c")).unwrap();
        assert_eq!(c.rows[0].p_hat, 0.5);
        assert_eq!(c.rows[1].count, 32);
        assert!(singularity_curve(&[3, 2], CurveMethod::Exhaustive, 0, &SeedSpec::new(0, "c")).is_err());
    }
}
