//! Rank evolution of nested principal minors (decrease-rank, step-down, rank-t)
//! and the kernel-witness lower bound on q_n(γ).
//!
//! A_{2n−2} is sampled once and A_m is its trailing m×m block, so A_{m−1} is
//! A_m with the first row and column removed.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::concentration::rho_exact;
use crate::error::{ensure, LabError, Result};
use crate::experiments::singularity::CurveMethod;
use crate::mc::mc_fold;
use crate::numerics::exact::{exact_kernel_vector, IntMatrix};
use crate::regime::RegimeTag;
use crate::report::{LemmaReport, Side};
use crate::rng::SeedSpec;
use crate::sample::SignSymMatrix;
use crate::stats::{combine, verdict_exact_le, verdict_le, Interval, McEstimate, Verdict, DEFAULT_CONFIDENCE};

/// Largest coupled size for exhaustive enumeration (2^21 matrices).
pub const RANK_EXHAUSTIVE_MAX: usize = 6;
pub const RANK_MC_MAX: usize = 32;
pub const Q_LOWER_MAX_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankCell {
    pub rk_m: usize,
    pub rk_m_minus_1: usize,
    pub count: u64,
}

/// Joint distribution of (rk A_m, rk A_{m−1}) over all draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEvolutionRecord {
    pub m: usize,
    /// Nonzero cells, sorted by (rk_m, rk_m_minus_1).
    pub cells: Vec<RankCell>,
    pub total: u64,
}

impl RankEvolutionRecord {
    pub fn count_where(&self, pred: impl Fn(usize, usize) -> bool) -> u64 {
        self.cells.iter().filter(|c| pred(c.rk_m, c.rk_m_minus_1)).map(|c| c.count).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEvolution {
    pub n_base: usize,
    pub method: CurveMethod,
    pub gamma: f64,
    pub total: u64,
    pub records: Vec<RankEvolutionRecord>,
    /// Draws where some consecutive pair of minors had Δrk outside [0, 2].
    pub interlacing_violations: u64,
    /// Per size s in [n−1, 2n−3]: draws with A_s singular and ρ(kernel witness) ≥ γ.
    pub q_hat_counts: Vec<(usize, u64)>,
    pub master: LemmaReport,
    pub step_down: Vec<LemmaReport>,
    pub rank_t: Vec<LemmaReport>,
    pub verdict: Verdict,
}

#[derive(Clone)]
struct RankAcc {
    dim: usize,
    joint: Vec<u64>,
    q_hat: Vec<u64>,
    violations: u64,
    draws: u64,
}

impl RankAcc {
    fn new(dim: usize) -> Self {
        let w = dim + 1;
        Self { dim, joint: vec![0; w * w * w], q_hat: vec![0; w], violations: 0, draws: 0 }
    }

    fn idx(&self, m: usize, a: usize, b: usize) -> usize {
        let w = self.dim + 1;
        (m * w + a) * w + b
    }

    fn observe(&mut self, a: &SignSymMatrix, n: usize, gamma: f64) {
        let top = self.dim;
        let ranks: Vec<usize> = (0..=top).map(|s| a.trailing_rank(s)).collect();
        if ranks.windows(2).any(|w| w[1] < w[0] || w[1] > w[0] + 2) {
            self.violations += 1;
        }
        for m in n..=top {
            let i = self.idx(m, ranks[m], ranks[m - 1]);
            self.joint[i] += 1;
        }
        for s in (n - 1)..top {
            if s > 0 && ranks[s] < s && kernel_rho(s, &a.trailing_minor(s)) >= gamma {
                self.q_hat[s] += 1;
            }
        }
        self.draws += 1;
    }

    fn absorb(&mut self, o: RankAcc) {
        self.joint.iter_mut().zip(&o.joint).for_each(|(x, y)| *x += y);
        self.q_hat.iter_mut().zip(&o.q_hat).for_each(|(x, y)| *x += y);
        self.violations += o.violations;
        self.draws += o.draws;
    }
}

/// ρ of the primitive integer kernel vector of a singular s×s integer matrix.
fn kernel_rho(s: usize, vals: &[i64]) -> f64 {
    let m = IntMatrix::from_i64(s, s, vals).expect("square block");
    let Some(k) = exact_kernel_vector(&m) else { return 0.0 };
    let v: Vec<f64> = k.iter().map(|x: &BigInt| x.to_f64().unwrap_or(f64::INFINITY)).collect();
    rho_exact(&v).unwrap_or(0.0)
}

/// Probability side from a count: exact for enumeration, Clopper–Pearson otherwise.
fn side(k: u64, total: u64, method: CurveMethod, conf: f64) -> Side {
    match method {
        CurveMethod::Exhaustive => Side::exact(k as f64 / total as f64),
        CurveMethod::MonteCarlo => Side::from(McEstimate::binomial(k, total, None, conf)),
    }
}

/// t = ⌊log₄(1/γ)⌋ clamped to [1, m−2].
pub fn rank_t_parameter(gamma: f64, m: usize) -> usize {
    let raw = ((1.0 / gamma).ln() / 4f64.ln()).floor();
    (raw.max(1.0) as usize).min(m.saturating_sub(2).max(1))
}

/// A check against the kernel-witness surrogate q̂ ≤ q: holding is meaningful
/// because the bound is increasing in q; failing proves nothing.
fn surrogate_verdict(lhs: Interval, rhs: Interval) -> Verdict {
    match verdict_le(lhs, rhs) {
        Verdict::Violated => Verdict::Inconclusive,
        v => v,
    }
}

pub fn rank_evolution(n_base: usize, method: CurveMethod, gamma: f64, budget: u64, seed: &SeedSpec) -> Result<RankEvolution> {
    ensure(n_base >= 2, || format!("n_base={n_base} must be ≥ 2"))?;
    ensure(gamma > 0.0, || format!("γ={gamma} must be positive"))?;
    let top = 2 * n_base - 2;
    let acc = match method {
        CurveMethod::Exhaustive => {
            if top > RANK_EXHAUSTIVE_MAX {
                return Err(LabError::EnumerationCap { dim: top, cap: RANK_EXHAUSTIVE_MAX });
            }
            let total = 1u64 << (top * (top + 1) / 2);
            let block = 1u64 << 10;
            (0..total.div_ceil(block))
                .into_par_iter()
                .map(|b| {
                    let mut acc = RankAcc::new(top);
                    for c in b * block..((b + 1) * block).min(total) {
                        acc.observe(&SignSymMatrix::from_code(top, c), n_base, gamma);
                    }
                    acc
                })
                .reduce(
                    || RankAcc::new(top),
                    |mut a, b| {
                        a.absorb(b);
                        a
                    },
                )
        }
        CurveMethod::MonteCarlo => {
            ensure(top <= RANK_MC_MAX, || format!("2n−2={top} exceeds {RANK_MC_MAX}"))?;
            ensure(budget >= 1, || "budget must be ≥ 1".into())?;
            mc_fold(seed, budget, || RankAcc::new(top), |rng, acc| acc.observe(&SignSymMatrix::sample(top, rng), n_base, gamma), RankAcc::absorb)
        }
    };
    let total = acc.draws;
    let records: Vec<RankEvolutionRecord> = (n_base..=top)
        .map(|m| {
            let mut cells = Vec::new();
            for a in 0..=m {
                for b in 0..m {
                    let k = acc.joint[acc.idx(m, a, b)];
                    if k > 0 {
                        cells.push(RankCell { rk_m: a, rk_m_minus_1: b, count: k });
                    }
                }
            }
            RankEvolutionRecord { m, cells, total }
        })
        .collect();
    let q_hat_counts: Vec<(usize, u64)> = ((n_base - 1)..top).map(|s| (s, acc.q_hat[s])).collect();

    // Master inequality: LHS plus one term per m share the error budget.
    let terms = records.len() + 1;
    let conf = 1.0 - (1.0 - DEFAULT_CONFIDENCE) / terms as f64;
    let n = n_base;
    let lhs = side(records[0].count_where(|a, _| a < n), total, method, conf);
    let mut rhs = Side::exact(0.0);
    for r in &records {
        let m = r.m;
        let s = side(r.count_where(|a, b| a + 1 == m && (b + 1 == m || b + 2 == m)), total, method, conf);
        rhs = Side { hat: rhs.hat + s.hat, lo: rhs.lo + s.lo, hi: rhs.hi + s.hi };
    }
    let f = 4.0 * n as f64;
    let rhs = Side { hat: f * rhs.hat, lo: f * rhs.lo, hi: f * rhs.hi };
    let mv = match method {
        CurveMethod::Exhaustive => verdict_exact_le(lhs.hat, rhs.hat, 0.0),
        CurveMethod::MonteCarlo => verdict_le(lhs.interval(), rhs.interval()),
    };
    let params = json!({"n_base": n_base, "method": method.as_str(), "samples": total, "confidence": conf});
    let mut master = LemmaReport::new("decrease-rank", RegimeTag::Lab, mv, lhs, rhs, params);
    if rhs.lo >= 1.0 {
        master = master.note("right side ≥ 1");
    }
    if method == CurveMethod::MonteCarlo {
        master = master.with_seed(seed);
    }

    let q_side = |s: usize| -> Side {
        let k = acc.q_hat[s];
        side(k, total, method, DEFAULT_CONFIDENCE)
    };
    let mut step_down = Vec::new();
    let mut rank_t = Vec::new();
    for r in &records {
        let m = r.m;
        let q = q_side(m - 1);
        let sd_lhs = side(r.count_where(|a, b| a + 1 == m && b + 2 == m), total, method, DEFAULT_CONFIDENCE);
        let sd_rhs = Side { hat: q.hat + gamma, lo: q.lo + gamma, hi: q.hi + gamma };
        let v = surrogate_verdict(sd_lhs.interval(), Interval::new(sd_rhs.lo, sd_rhs.lo));
        step_down.push(
            LemmaReport::new("step-down", RegimeTag::Lab, v, sd_lhs, sd_rhs, json!({"m": m, "gamma": gamma, "q_hat": q.hat, "samples": total}))
                .note("surrogate: q replaced by the w=0 kernel-witness lower bound"),
        );
        if m >= 3 {
            let t = rank_t_parameter(gamma, m);
            let g = |qv: f64| 3f64.powi(t as i32) * qv + (2f64.powi(t as i32) * gamma + 2f64.powi(-(t as i32))).powf(0.25);
            let rt_lhs = side(r.count_where(|a, b| a + 1 == m && b + 1 == m), total, method, DEFAULT_CONFIDENCE);
            let rt_rhs = Side { hat: g(q.hat), lo: g(q.lo), hi: g(q.hi) };
            let v = surrogate_verdict(rt_lhs.interval(), Interval::new(rt_rhs.lo, rt_rhs.lo));
            rank_t.push(
                LemmaReport::new("rank-t", RegimeTag::Lab, v, rt_lhs, rt_rhs, json!({"m": m, "t": t, "gamma": gamma, "q_hat": q.hat, "samples": total}))
                    .note("surrogate: q replaced by the w=0 kernel-witness lower bound"),
            );
        }
    }
    if method == CurveMethod::MonteCarlo {
        for r in step_down.iter_mut().chain(rank_t.iter_mut()) {
            r.seed = Some(seed.clone());
        }
    }
    let interlace = if acc.violations == 0 { Verdict::Holds } else { Verdict::Violated };
    let verdict = combine([master.verdict, interlace].into_iter().chain(step_down.iter().chain(&rank_t).map(|r| r.verdict)));
    Ok(RankEvolution {
        n_base,
        method,
        gamma,
        total,
        records,
        interlacing_violations: acc.violations,
        q_hat_counts,
        master,
        step_down,
        rank_t,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QLowerReport {
    pub n: usize,
    pub gamma: f64,
    /// Frequency of {A singular, ρ(kernel witness) ≥ γ}; a lower bound on q_n(γ).
    pub lower_bound: McEstimate,
    pub singular: McEstimate,
}

pub fn q_lower_diagnostic(n: usize, gamma: f64, budget: u64, seed: &SeedSpec) -> Result<QLowerReport> {
    ensure((1..=Q_LOWER_MAX_N).contains(&n), || format!("n={n} outside [1, {Q_LOWER_MAX_N}]"))?;
    ensure(budget >= 1, || "budget must be ≥ 1".into())?;
    let (sing, hit) = mc_fold(
        seed,
        budget,
        || (0u64, 0u64),
        |rng, acc| {
            let a = SignSymMatrix::sample(n, rng);
            if a.is_singular() {
                acc.0 += 1;
                if gamma <= 1.0 && kernel_rho(n, &a.to_i64()) >= gamma {
                    acc.1 += 1;
                }
            }
        },
        |a, b| {
            a.0 += b.0;
            a.1 += b.1;
        },
    );
    Ok(QLowerReport {
        n,
        gamma,
        lower_bound: McEstimate::binomial(hit, budget, Some(seed.clone()), DEFAULT_CONFIDENCE).as_lower_bound(),
        singular: McEstimate::binomial(sing, budget, Some(seed.clone()), DEFAULT_CONFIDENCE),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::exact::rank_i64;

    #[test]
    fn exhaustive_n3_master_holds_exactly() {
        let r = rank_evolution(3, CurveMethod::Exhaustive, 0.25, 0, &SeedSpec::new(0, "r")).unwrap();
        assert_eq!(r.total, 1 << 10);
        assert_eq!(r.interlacing_violations, 0);
        assert_eq!(r.master.verdict, Verdict::Holds);
        for rec in &r.records {
            assert_eq!(rec.cells.iter().map(|c| c.count).sum::<u64>(), rec.total);
        }
        // P(det A₃ = 0) from the m=3 marginal matches direct enumeration of 3×3 matrices
        let direct = (0..64u64).filter(|&c| SignSymMatrix::from_code(3, c).is_singular()).count() as f64 / 64.0;
        assert_eq!(r.master.lhs.hat, direct);
        assert!(r.verdict != Verdict::Violated);
    }

    /// Oracle: joint counts recomputed by a direct loop with an independent rank routine.
    #[test]
    fn joint_counts_match_direct_loop() {
        let r = rank_evolution(2, CurveMethod::Exhaustive, 0.5, 0, &SeedSpec::new(0, "r")).unwrap();
        let mut direct = std::collections::BTreeMap::new();
        for c in 0..8u64 {
            let a = SignSymMatrix::from_code(2, c);
            let r2 = rank_i64(2, 2, &a.to_i64());
            *direct.entry((r2, 1usize)).or_insert(0u64) += 1;
        }
        let got: std::collections::BTreeMap<_, _> = r.records[0].cells.iter().map(|c| ((c.rk_m, c.rk_m_minus_1), c.count)).collect();
        assert_eq!(got, direct);
    }

    #[test]
    fn mc_interlacing_and_master() {
        let r = rank_evolution(5, CurveMethod::MonteCarlo, 1.0 / 16.0, 20_000, &SeedSpec::new(3, "rank")).unwrap();
        assert_eq!(r.interlacing_violations, 0);
        assert_eq!(r.records.len(), 4);
        assert_ne!(r.master.verdict, Verdict::Violated);
        assert!(r.step_down.iter().chain(&r.rank_t).all(|x| x.verdict != Verdict::Violated));
    }

    #[test]
    fn rank_t_parameter_range() {
        assert_eq!(rank_t_parameter(1.0 / 16.0, 10), 2);
        assert_eq!(rank_t_parameter(0.9, 10), 1);
        assert_eq!(rank_t_parameter(1e-9, 5), 3);
    }

    #[test]
    fn q_lower_trivial_gammas() {
        let s = SeedSpec::new(5, "q");
        let big = q_lower_diagnostic(6, 1.5, 4096, &s).unwrap();
        assert_eq!(big.lower_bound.p_hat, 0.0);
        let tiny = q_lower_diagnostic(6, 2f64.powi(-6), 4096, &s).unwrap();
        assert_eq!(tiny.lower_bound.p_hat, tiny.singular.p_hat);
        assert!(tiny.singular.p_hat > 0.0);
        let mid = q_lower_diagnostic(8, 0.1, 4096, &s).unwrap();
        assert!(mid.lower_bound.p_hat <= mid.singular.p_hat);
        assert!(q_lower_diagnostic(13, 0.1, 10, &s).is_err());
    }
}
