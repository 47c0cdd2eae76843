//! Registry of lemma verifiers with their default configurations.
//!
//! Every entry turns (budget, configuration count, seed) into a list of
//! reports. Configuration `i` of lemma `id` draws from the child stream
//! `"{id}/{i}"`, so entries never share randomness.

use rand::Rng;
use serde_json::json;

use crate::concentration::{threshold_estimate, verify_rho_v_tau};
use crate::error::{LabError, Result};
use crate::experiments::opnorm::verify_opnorm_concentration;
use crate::experiments::rank::rank_evolution;
use crate::experiments::replacement::{verify_replacement_chain, THRESHOLD_RESOLUTION};
use crate::experiments::singularity::CurveMethod;
use crate::fourier::boxes::{AxisBox, BoxUnion};
use crate::fourier::charfn::{verify_cos_phi_bounds, verify_fourier_comparison, SweepReport};
use crate::fourier::esseen::{verify_esseen, verify_fourier_inversion, verify_reverse_esseen};
use crate::fourier::geometry::{verify_borell_1d, verify_gauss_bm, verify_gauss_tail};
use crate::lcd::verifiers::{
    lcd_rarity_experiment, rarity_alpha_for, verify_cond_walk_lcd, verify_hanson_wright, verify_inverse_lwo,
    verify_projection_decay, verify_rank_h, verify_second_moment, verify_tensorization, LwoConstants, RankEventSpec,
};
use crate::nets::lattice::{markov_step_mc, round_vector_to_net, TrivialNetSpec};
use crate::nets::rounding::round_frame_to_net;
use crate::numerics::matrix::{unit, RealMatrix};
use crate::numerics::quad::infamous_integral;
use crate::regime::{RegimeConstants, RegimeTag};
use crate::report::{LemmaReport, Side};
use crate::rng::{standard_normal, LabRng, SeedSpec};
use crate::sample::OrthoFrame;
use crate::stats::{verdict_exact_le, Verdict};

/// Budget ceiling for RhoVtau escalation.
pub const RHO_V_TAU_MAX_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub budget: u64,
    pub configs: usize,
    pub regime: RegimeConstants,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { budget: 100_000, configs: 10, regime: RegimeConstants::lab() }
    }
}

pub const SUITE_IDS: &[&str] = &[
    "cos-approx",
    "phiBnds",
    "fourier-comparison",
    "inversion",
    "infamous-int",
    "esseen",
    "revEsseen",
    "GaussBM",
    "Borell",
    "Gtail",
    "invLwO",
    "CondWalkLCMfinal",
    "tensor",
    "HansonWright",
    "2ndMoment",
    "rankH",
    "lcd-rare",
    "LwO-for-AX",
    "basis-net",
    "thmnet",
    "RhoVtau",
    "expForm",
    "replacement",
    "decrease-rank",
    "step-down",
    "rank-t",
    "op-concentration",
];

fn sweep(id: &str, s: &[&SweepReport], extra_ok: bool, params: serde_json::Value) -> LemmaReport {
    let violations: usize = s.iter().map(|r| r.violations).sum();
    let points: usize = s.iter().map(|r| r.points).sum();
    let worst = s.iter().map(|r| r.worst_margin).fold(f64::INFINITY, f64::min);
    let verdict = if violations == 0 && points > 0 && extra_ok { Verdict::Holds } else { Verdict::Violated };
    let mut p = params;
    p["points"] = json!(points);
    p["worst_margin"] = json!(worst);
    LemmaReport::new(id, RegimeTag::Lab, verdict, Side::exact(violations as f64), Side::exact(0.0), p).note("lhs counts violations")
}

fn sign_matrix(rng: &mut LabRng, r: usize, c: usize) -> RealMatrix {
    RealMatrix::from_fn(r, c, |_, _| if rng.gen::<bool>() { 1.0 } else { -1.0 })
}

fn frame(rng: &mut LabRng, rows: usize, k: usize) -> Result<RealMatrix> {
    Ok(OrthoFrame::sample(rows, k, rng)?.matrix)
}

fn gaussian_unit(rng: &mut LabRng, n: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..n).map(|_| standard_normal(rng)).collect();
        if let Some(u) = unit(&g) {
            return u;
        }
    }
}

/// Unit vector whose first d coordinates lie strictly inside the flat window
/// κ₀ n^{−1/2} ≤ |v_i| ≤ κ₁ n^{−1/2}, with a Gaussian direction on the rest.
pub fn sample_flat_unit(rng: &mut LabRng, n: usize, d: usize, kappa0: f64, kappa1: f64) -> Vec<f64> {
    let sn = (n as f64).sqrt();
    let (lo, hi) = (1.5 * kappa0, kappa1 - kappa0 / 2.0);
    let head: Vec<f64> = (0..d).map(|_| rng.gen_range(lo..hi) / sn * if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
    let used: f64 = head.iter().map(|x| x * x).sum();
    let tail = gaussian_unit(rng, n - d);
    let s = (1.0 - used).max(0.0).sqrt();
    head.into_iter().chain(tail.into_iter().map(|x| x * s)).collect()
}

fn random_union(rng: &mut LabRng, dim: usize, count: usize) -> Result<BoxUnion> {
    let boxes = (0..count)
        .map(|_| {
            let lo: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.5..1.0)).collect();
            let hi: Vec<f64> = lo.iter().map(|a| a + rng.gen_range(0.01..1.2)).collect();
            AxisBox::new(lo, hi)
        })
        .collect::<Result<Vec<_>>>()?;
    BoxUnion::new(dim, boxes)
}

/// RhoVtau at escalating budgets until the verdict is conclusive or the ceiling is hit.
#[allow(clippy::too_many_arguments)]
pub fn rho_v_tau_report(v: &[f64], n: usize, d: usize, big_l: f64, mu: f64, budget: u64, max_budget: u64, seed: &SeedSpec) -> Result<LemmaReport> {
    let mut b = budget;
    loop {
        let th = threshold_estimate(v, big_l, n, d, mu, b, THRESHOLD_RESOLUTION, seed)?;
        let (verdict, lhs, rhs) = verify_rho_v_tau(v, &th)?;
        if verdict != Verdict::Inconclusive || b >= max_budget {
            return Ok(LemmaReport::new(
                "RhoVtau",
                RegimeTag::Lab,
                verdict,
                Side::exact(lhs),
                Side::exact(rhs),
                json!({"n": n, "d": d, "L": big_l, "mu": mu, "budget": b, "t_low": th.t_low, "t_high": th.t_high}),
            )
            .with_seed(seed));
        }
        b = (b * 10).min(max_budget);
    }
}

/// Reports for one lemma id under `cfg`.
pub fn run_lemma(id: &str, cfg: &SuiteConfig, seed: &SeedSpec) -> Result<Vec<LemmaReport>> {
    let base = seed.child(id);
    let budget = cfg.budget;
    let consts = &cfg.regime;
    let each = |f: &mut dyn FnMut(usize, &SeedSpec, &mut LabRng) -> Result<LemmaReport>| -> Result<Vec<LemmaReport>> {
        (0..cfg.configs)
            .map(|i| {
                let s = base.child(i);
                let mut rng = s.child("config").rng(0);
                f(i, &s, &mut rng)
            })
            .collect()
    };
    match id {
        "cos-approx" | "phiBnds" => {
            let r = verify_cos_phi_bounds(0.25, 10_000, &base)?;
            let params = json!({"mu": 0.25, "grid": 10_000});
            Ok(vec![if id == "cos-approx" {
                sweep(id, &[&r.scalar_lower, &r.scalar_upper], true, params)
            } else {
                sweep(id, &[&r.matrix_lower, &r.matrix_upper], r.positive, params)
            }
            .with_seed(&base)])
        }
        "fourier-comparison" => {
            let r = verify_fourier_comparison(10_000, 8, &base)?;
            Ok(vec![sweep(id, &[&r], true, json!({"trials": 10_000, "max_n": 8})).with_seed(&base)])
        }
        "inversion" => each(&mut |_, s, rng| {
            let m = rng.gen_range(1..=6);
            let atoms: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let probs: Vec<f64> = raw.iter().map(|p| p / total).collect();
            let w = rng.gen_range(-2.0..2.0);
            let r = verify_fourier_inversion(&atoms, &probs, w, 1e-6)?;
            Ok(LemmaReport::new(id, RegimeTag::Lab, r.verdict, Side::exact(r.lhs), Side::exact(r.rhs), json!({"atoms": atoms, "probs": probs, "w": w, "error_bound": r.error_bound}))
                .with_seed(s)
                .note("two sides of an identity"))
        }),
        "infamous-int" => (0..=20u32)
            .map(|k| {
                let q = infamous_integral(k)?;
                let v = verdict_exact_le(q.value + q.error_bound, 2.0, 0.0);
                Ok(LemmaReport::new(id, RegimeTag::Lab, v, Side { hat: q.value, lo: q.value - q.error_bound, hi: q.value + q.error_bound }, Side::exact(2.0), json!({"k": k})))
            })
            .collect(),
        "esseen" => each(&mut |i, s, rng| verify_esseen(&sign_matrix(rng, 8, 1 + i % 3), 0.25, 0.5, budget, s)),
        "revEsseen" => each(&mut |i, s, rng| verify_reverse_esseen(&sign_matrix(rng, 8, 1 + i % 3), 0.25, 1.0, 0.05, budget, s)),
        "GaussBM" => each(&mut |_, s, rng| {
            let dim = rng.gen_range(1..=3);
            let c = rng.gen_range(1..=3);
            Ok(verify_gauss_bm(&random_union(rng, dim, c)?)?.with_seed(s))
        }),
        "Borell" => each(&mut |_, s, rng| {
            let a0 = rng.gen_range(-2.0..1.0);
            let b0 = rng.gen_range(-2.0..1.0);
            let a = (a0, a0 + rng.gen_range(0.01..2.0));
            let b = (b0, b0 + rng.gen_range(0.01..2.0));
            Ok(verify_borell_1d(a, b)?.with_seed(s))
        }),
        "Gtail" => [1usize, 4, 8, 16].iter().map(|&k| verify_gauss_tail(k, budget, &base.child(k))).collect(),
        "invLwO" => each(&mut |_, s, rng| {
            let d = 16;
            let v = gaussian_unit(rng, d);
            let w = frame(rng, d, 1)?.transpose();
            verify_inverse_lwo(&v, &w, 0.2, 0.2, LwoConstants { r: 1.0, c1: 1.0, c2: 0.5 }, budget, s)
        }),
        "CondWalkLCMfinal" => each(&mut |i, s, rng| {
            // α small enough that generic Y = v/t has D_α(Y) > 16 certified
            let c = RegimeConstants { alpha: 0.004, ..consts.clone() };
            let (d, t) = (8, 0.005);
            let y: Vec<f64> = gaussian_unit(rng, d).iter().map(|x| x / t).collect();
            let w = frame(rng, 2 * d, i % 3)?;
            verify_cond_walk_lcd(&y, &w, &c, t, budget, s)
        }),
        "tensor" => each(&mut |i, s, rng| {
            let w = sign_matrix(rng, 8, 3 + i % 2);
            verify_tensorization(&w, consts.mu, 0.1, 12, 4, budget, s)
        }),
        "HansonWright" => each(&mut |i, s, rng| {
            let d = [8usize, 16, 32][i % 3];
            let k = rng.gen_range(1..=2 * d);
            verify_hanson_wright(&frame(rng, 2 * d, k)?, 0.25, 0.03, budget, s)
        }),
        "2ndMoment" => each(&mut |_, s, rng| {
            let x: Vec<f64> = (0..12).map(|_| rng.gen_range(-3i32..=3) as f64).collect();
            verify_second_moment(&x, 12, 3, consts.mu, budget, s)
        }),
        "rankH" => each(&mut |i, s, rng| {
            let spec = RankEventSpec::new(16, 4, i % 3, consts.c0)?;
            let x: Vec<f64> = (0..4).map(|_| rng.gen_range(4.0..8.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
            verify_rank_h(&spec, &x, 4.0, consts, budget, s)
        }),
        "lcd-rare" => [0.1, 0.25, 0.5]
            .iter()
            .map(|&target| lcd_rarity_experiment(32, 32, 64.0, 2.0, rarity_alpha_for(32, target), consts.c0, budget, &base.child(target)))
            .collect(),
        "LwO-for-AX" => {
            let h = RealMatrix::identity(4).scale(3.0);
            Ok(vec![verify_projection_decay(&h, 0, consts.c0, 6, &[8, 16], budget.max(1_000_000), &base)?])
        }
        "basis-net" => each(&mut |i, s, rng| {
            let (d, k, delta) = (8, 1 + i % 4, 0.25);
            let u = OrthoFrame::sample(2 * d, k, rng)?;
            let rows = 1 + rng.gen_range(0..20);
            let a = RealMatrix::from_fn(rows, 2 * d, |_, _| standard_normal(rng));
            let r = round_frame_to_net(&u, &a, delta, &s.child("round"), 64)?;
            let ratio = [r.deviations.a_hs / r.bounds.a_hs, r.deviations.hs / r.bounds.hs, r.deviations.op / r.bounds.op]
                .into_iter()
                .fold(0.0, f64::max);
            let v = if r.satisfies() { Verdict::Holds } else { Verdict::Violated };
            Ok(LemmaReport::new(id, RegimeTag::Lab, v, Side::exact(ratio), Side::exact(1.0), json!({"d": d, "k": k, "delta": delta, "attempts": r.attempts}))
                .with_seed(s)
                .note("lhs is the largest deviation-to-bound ratio"))
        }),
        "thmnet" => each(&mut |i, s, rng| {
            let (n, d, eps) = (16 + 16 * (i % 3), consts.d, 0.05);
            let spec = TrivialNetSpec::new(n, d, eps, consts.kappa0, consts.kappa1)?;
            let v = sample_flat_unit(rng, n, d, consts.kappa0, consts.kappa1);
            let r = round_vector_to_net(&v, &spec, &s.child("round"))?;
            let mk = markov_step_mc(&v, &spec, consts.mu, budget, &s.child("markov"))?;
            let ok = r.r_inf <= r.bound * (1.0 + 1e-12) && spec.contains_int(&r.x);
            let v = if !ok { Verdict::Violated } else { crate::stats::verdict_le(mk.mean.interval(), Side::exact(mk.bound).interval()) };
            Ok(LemmaReport::new(id, RegimeTag::Lab, v, Side::from(&mk.mean), Side::exact(mk.bound), json!({"n": n, "d": d, "eps": eps, "r_inf": r.r_inf, "r_bound": r.bound, "exact_mean": mk.exact_mean}))
                .with_seed(s)
                .note("lhs is E‖Mr‖²; rounding bounds checked exactly"))
        }),
        "RhoVtau" => each(&mut |_, s, rng| {
            let v = gaussian_unit(rng, 10);
            rho_v_tau_report(&v, 10, 2, consts.big_l, consts.mu, budget, RHO_V_TAU_MAX_BUDGET, s)
        }),
        "expForm" | "replacement" => {
            let n = 10;
            let v = vec![1.0 / (n as f64).sqrt(); n];
            let th = threshold_estimate(&v, consts.big_l, n, 2, consts.mu, budget, THRESHOLD_RESOLUTION, &base.child("threshold"))?;
            let r = verify_replacement_chain(&v, 2.0 * th.t_high, consts.big_l, n, 2, consts.mu, budget, &base)?;
            if id == "expForm" {
                Ok(vec![r.exp_form])
            } else {
                let fallback = LemmaReport::new(id, RegimeTag::Lab, Verdict::Vacuous, Side::exact(f64::NAN), Side::exact((50.0 * consts.big_l * 2.0 * th.t_high).powi(n as i32)), json!({"n": n, "t": 2.0 * th.t_high}))
                    .with_seed(&base)
                    .note("(9Lt)ⁿ > 1, spot check skipped");
                Ok(vec![r.replacement.unwrap_or(fallback)])
            }
        }
        "decrease-rank" | "step-down" | "rank-t" => {
            let exact = rank_evolution(3, CurveMethod::Exhaustive, 1.0 / 16.0, 0, &base)?;
            let mc = rank_evolution(5, CurveMethod::MonteCarlo, 1.0 / 16.0, budget, &base.child("mc"))?;
            Ok([exact, mc]
                .into_iter()
                .flat_map(|r| match id {
                    "decrease-rank" => vec![r.master],
                    "step-down" => r.step_down,
                    _ => r.rank_t,
                })
                .collect())
        }
        "op-concentration" => [64usize, 128].iter().map(|&n| Ok(verify_opnorm_concentration(n, (budget / 10).max(1000), &base.child(n))?.report)).collect(),
        other => Err(LabError::InvalidArgument(format!("unknown lemma id `{other}`"))),
    }
}

/// Runs `only` (or every registered id when empty) in registry order.
pub fn lemma_suite(only: &[String], cfg: &SuiteConfig, seed: &SeedSpec) -> Result<Vec<LemmaReport>> {
    for o in only {
        if !SUITE_IDS.contains(&o.as_str()) {
            return Err(LabError::InvalidArgument(format!("unknown lemma id `{o}`")));
        }
    }
    let mut out = Vec::new();
    for id in SUITE_IDS.iter().filter(|id| only.is_empty() || only.iter().any(|o| o == *id)) {
        out.extend(run_lemma(id, cfg, seed)?);
    }
    Ok(out)
}
