//! The chain from the zeroed matrix M back to A: expForm, the pointwise Fourier
//! comparison, and a spot check of replacement.

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::concentration::{levy_mc, threshold_estimate, ThresholdResult};
use crate::error::{ensure, Result};
use crate::fourier::charfn::{char_fn_eval, CharFnSpec, SweepReport, SWEEP_TOL};
use crate::mc::mc_bounded_mean;
use crate::numerics::matrix::norm2;
use crate::regime::RegimeTag;
use crate::report::{LemmaReport, Side};
use crate::rng::SeedSpec;
use crate::sample::{LazyLaw, SignSymMatrix, ZeroedMatrix};
use crate::stats::{combine, verdict_prob_le, Verdict};

pub const COMPARISON_POINTS: usize = 10_000;
pub const THRESHOLD_RESOLUTION: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplacementReport {
    pub threshold: ThresholdResult,
    pub exp_form: LemmaReport,
    pub comparison: SweepReport,
    /// Present only when (9Lt)ⁿ ≤ 1.
    pub replacement: Option<LemmaReport>,
    pub verdict: Verdict,
}

#[allow(clippy::too_many_arguments)]
pub fn verify_replacement_chain(v: &[f64], t: f64, big_l: f64, n: usize, d: usize, mu: f64, budget: u64, seed: &SeedSpec) -> Result<ReplacementReport> {
    ensure(v.len() == n, || format!("v has length {}, expected n={n}", v.len()))?;
    ensure((norm2(v) - 1.0).abs() <= 1e-9, || "v must be a unit vector".into())?;
    // the comparison |cos x| ≤ 1 − μ + μcos 2x needs μ ≤ 1/4
    ensure(mu > 0.0 && mu <= 0.25, || format!("μ={mu} outside (0, 1/4]"))?;
    ensure(t > 0.0, || format!("t={t} must be positive"))?;
    let threshold = threshold_estimate(v, big_l, n, d, mu, budget, THRESHOLD_RESOLUTION, &seed.child("threshold"))?;
    let params = json!({"n": n, "d": d, "L": big_l, "mu": mu, "t": t, "t_high": threshold.t_high, "budget": budget});
    let bound9 = (9.0 * big_l * t).powi(n as i32);

    if t < threshold.t_high {
        let r = LemmaReport::new("expForm", RegimeTag::Lab, Verdict::PreconditionsUnmet, Side::exact(f64::NAN), Side::exact(bound9), params)
            .with_seed(seed)
            .note("t below the threshold bracket");
        return Ok(ReplacementReport {
            threshold,
            exp_form: r,
            comparison: SweepReport::new(),
            replacement: None,
            verdict: Verdict::PreconditionsUnmet,
        });
    }

    let law = LazyLaw::new(mu)?;
    let s_exp = seed.child("exp-form");
    let inv_t2 = 1.0 / (t * t);
    let mean = mc_bounded_mean(
        &s_exp,
        budget,
        1.0,
        || (ZeroedMatrix { n, d, mu, h1: vec![0; (n - d) * d] }, Vec::new()),
        |rng, (m, scratch)| {
            m.resample(&law, rng);
            (-std::f64::consts::PI * m.apply_norm_sq(v, scratch) * inv_t2).exp()
        },
    );
    let exp_form = LemmaReport::new(
        "expForm",
        RegimeTag::Lab,
        verdict_prob_le(mean.interval(), Side::exact(bound9).interval()),
        Side::from(&mean),
        Side::exact(bound9),
        params.clone(),
    )
    .with_seed(&s_exp);

    let mut comparison = SweepReport::new();
    let mut rng = seed.child("xi").rng(0);
    let psi_spec = CharFnSpec::SymMatrix { v: v.to_vec() };
    let chi_spec = CharFnSpec::Zeroed { v: v.to_vec(), d, mu };
    for _ in 0..COMPARISON_POINTS {
        let xi: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let xi2: Vec<f64> = xi.iter().map(|x| 2.0 * x).collect();
        let psi = char_fn_eval(&psi_spec, &xi)?;
        let chi = char_fn_eval(&chi_spec, &xi2)?;
        comparison.record(chi - psi, SWEEP_TOL);
    }
    let cmp_verdict = if comparison.holds() { Verdict::Holds } else { Verdict::Violated };

    let replacement = if bound9 <= 1.0 {
        let s_levy = seed.child("replacement");
        let radius = t * (n as f64).sqrt();
        let est = levy_mc(
            n,
            |rng, x| {
                let a = SignSymMatrix::sample(n, rng);
                x.copy_from_slice(&a.mul_vec(v));
            },
            radius,
            &[],
            budget.max(1000),
            &s_levy,
        )?;
        let bound50 = (50.0 * big_l * t).powi(n as i32);
        let e = est.estimate;
        Some(
            LemmaReport::new("replacement", RegimeTag::Lab, verdict_prob_le(e.interval(), Side::exact(bound50).interval()), Side::from(&e), Side::exact(bound50), params)
                .with_seed(&s_levy)
                .note("left side estimates the sup over a finite center set"),
        )
    } else {
        None
    };
    let verdict = combine([exp_form.verdict, cmp_verdict].into_iter().chain(replacement.iter().map(|r| r.verdict)));
    Ok(ReplacementReport { threshold, exp_form, comparison, replacement, verdict })
}
