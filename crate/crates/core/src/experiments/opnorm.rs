//! op-concentration: P(‖A‖ ≥ 4√n) ≤ 4e^{−n/32}.
//!
//! A full SVD per sample is wasteful when ‖A‖ ≈ 2√n. For symmetric A,
//! ‖A⁸x‖^{1/8} ≤ ‖A‖ ≤ ‖A⁸‖_F^{1/8} for unit x, and the upper end is at most
//! n^{1/16}‖A‖, so the bracket decides the event unless it straddles 4√n.
//! Only those samples go to the SVD.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{ensure, Result};
use crate::mc::mc_fold;
use crate::numerics::svd::op_norm;
use crate::regime::RegimeTag;
use crate::report::{LemmaReport, Side};
use crate::rng::{standard_normal, SeedSpec};
use crate::sample::SignSymMatrix;
use crate::stats::{verdict_prob_le, McEstimate, Verdict, DEFAULT_CONFIDENCE};

pub const OPNORM_MIN_N: usize = 16;
const POWER_STEPS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpnormReport {
    pub report: LemmaReport,
    /// Mean of the lower and upper brackets of σ₁/√n.
    pub mean_ratio_low: f64,
    pub mean_ratio_high: f64,
    pub svd_fallbacks: u64,
}

/// Dense symmetric square, row-major.
fn square(a: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        let row = &mut out[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a[i * n + k];
            if aik != 0.0 {
                for (o, b) in row.iter_mut().zip(&a[k * n..(k + 1) * n]) {
                    *o += aik * b;
                }
            }
        }
    }
    out
}

fn mat_vec(a: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    (0..n).map(|i| a[i * n..(i + 1) * n].iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// (lower, upper) brackets of ‖A‖ from A⁸.
pub fn opnorm_bracket(a: &SignSymMatrix, start: &[f64]) -> (f64, f64) {
    let n = a.n();
    let a8 = square(&square(&square(&a.to_i64().iter().map(|&x| x as f64).collect::<Vec<_>>(), n), n), n);
    let upper = a8.iter().map(|x| x * x).sum::<f64>().sqrt().powf(0.125);
    let mut x = start.to_vec();
    let mut lower = 0.0f64;
    for _ in 0..POWER_STEPS {
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nx == 0.0 {
            break;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        let y = mat_vec(&a8, n, &x);
        lower = lower.max(y.iter().map(|v| v * v).sum::<f64>().sqrt().powf(0.125));
        x = y;
    }
    (lower, upper.max(lower))
}

pub fn verify_opnorm_concentration(n: usize, budget: u64, seed: &SeedSpec) -> Result<OpnormReport> {
    ensure(n >= OPNORM_MIN_N, || format!("n={n} below {OPNORM_MIN_N}"))?;
    ensure(budget >= 1, || "budget must be ≥ 1".into())?;
    let cap = 4.0 * (n as f64).sqrt();
    // (exceedances, svd calls, Σ lower, Σ upper)
    let (hits, svds, lo_sum, hi_sum) = mc_fold(
        seed,
        budget,
        || (0u64, 0u64, 0.0f64, 0.0f64),
        |rng, acc| {
            let a = SignSymMatrix::sample(n, rng);
            let start: Vec<f64> = (0..n).map(|_| standard_normal(rng)).collect();
            let (lo, hi) = opnorm_bracket(&a, &start);
            let exceeds = if hi < cap {
                false
            } else if lo >= cap {
                true
            } else {
                acc.1 += 1;
                op_norm(&a.to_real()).map(|s| s >= cap).unwrap_or(true)
            };
            acc.0 += exceeds as u64;
            acc.2 += lo;
            acc.3 += hi;
        },
        |a, b| {
            a.0 += b.0;
            a.1 += b.1;
            a.2 += b.2;
            a.3 += b.3;
        },
    );
    let est = McEstimate::binomial(hits, budget, Some(seed.clone()), DEFAULT_CONFIDENCE);
    let bound = 4.0 * (-(n as f64) / 32.0).exp();
    let verdict: Verdict = verdict_prob_le(est.interval(), Side::exact(bound).interval());
    let sn = (n as f64).sqrt() * budget as f64;
    let report = LemmaReport::new("op-concentration", RegimeTag::Lab, verdict, Side::from(&est), Side::exact(bound), json!({"n": n, "budget": budget, "svd_fallbacks": svds}))
        .with_seed(seed);
    Ok(OpnormReport { report, mean_ratio_low: lo_sum / sn, mean_ratio_high: hi_sum / sn, svd_fallbacks: svds })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Oracle: Jacobi SVD on the same matrices.
    #[test]
    fn bracket_contains_svd_norm() {
        let mut rng = SeedSpec::new(4, "br").rng(0);
        for n in [5usize, 16, 33] {
            for _ in 0..5 {
                let a = SignSymMatrix::sample(n, &mut rng);
                let start: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
                let (lo, hi) = opnorm_bracket(&a, &start);
                let s = op_norm(&a.to_real()).unwrap();
                assert!(lo <= s * (1.0 + 1e-9) && s <= hi * (1.0 + 1e-9), "n={n}: {lo} {s} {hi}");
                assert!(hi <= s * (n as f64).powf(1.0 / 16.0) * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn n64_holds_with_margin() {
        let r = verify_opnorm_concentration(64, 2000, &SeedSpec::new(1, "op")).unwrap();
        assert_eq!(r.report.verdict, Verdict::Holds);
        assert_eq!(r.report.lhs.hat, 0.0);
        assert!((r.report.rhs.hat - 4.0 * (-2f64).exp()).abs() < 1e-15);
        assert!(r.mean_ratio_low > 1.5 && r.mean_ratio_low < 2.5, "{}", r.mean_ratio_low);
    }

    #[test]
    fn small_n_is_vacuous_and_checked() {
        let r = verify_opnorm_concentration(16, 500, &SeedSpec::new(2, "op")).unwrap();
        assert_eq!(r.report.verdict, Verdict::Vacuous);
        assert!(verify_opnorm_concentration(15, 10, &SeedSpec::new(2, "op")).is_err());
    }
}
