//! Gaussian-space facts and level-set geometry.

use serde::{Deserialize, Serialize};
use serde_json::json;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{ensure, Result};
use crate::fourier::boxes::{AxisBox, BoxUnion};
use crate::mc::{mc_count, mc_probability};
use crate::numerics::matrix::RealMatrix;
use crate::numerics::special::{gauss_sd, std_normal_cdf, std_normal_quantile, gaussian_interval_mass};
use crate::numerics::torus::torus_norm;
use crate::regime::RegimeTag;
use crate::report::{LemmaReport, Side};
use crate::rng::{standard_normal, uniform01, LabRng, SeedSpec};
use crate::stats::{verdict_exact_le, verdict_prob_le, Interval, McEstimate, Verdict};

/// Fresh γ_dim sample: coordinates N(0, 1/(2π)).
pub fn gaussian_point(rng: &mut LabRng, out: &mut [f64]) {
    let sd = gauss_sd();
    out.iter_mut().for_each(|x| *x = sd * standard_normal(rng));
}

/// γ_dim(S) by Monte Carlo for a membership predicate.
pub fn gaussian_measure_mc<F>(indicator: F, dim: usize, budget: u64, seed: &SeedSpec) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> bool + Sync,
{
    ensure(dim >= 1, || "dimension must be ≥ 1".into())?;
    Ok(mc_probability(seed, budget, || vec![0.0; dim], |rng, x| {
        gaussian_point(rng, x);
        indicator(x)
    }))
}

/// S_W(t) = {θ : ‖Wθ‖_T ≤ √t}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetSpec {
    pub w: RealMatrix,
    pub t: f64,
}

impl LevelSetSpec {
    pub fn new(w: RealMatrix, t: f64) -> Result<Self> {
        ensure(t >= 0.0, || format!("level t={t} must be ≥ 0"))?;
        Ok(Self { w, t })
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        level_value(&self.w, theta) <= self.t
    }
}

/// ‖Wθ‖_T².
pub fn level_value(w: &RealMatrix, theta: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..w.rows() {
        let x: f64 = w.row(i).iter().zip(theta).map(|(a, b)| a * b).sum();
        let d = x - x.round();
        s += d * d;
    }
    s
}

/// γ_k(A − A) ≥ γ_k(A)⁴, both sides exact.
pub fn verify_gauss_bm(a: &BoxUnion) -> Result<LemmaReport> {
    let lhs = a.diffset()?.gaussian_measure()?;
    let rhs = a.gaussian_measure()?.powi(4);
    let verdict = verdict_exact_le(rhs, lhs, 1e-12);
    Ok(LemmaReport::new("GaussBM", RegimeTag::Lab, verdict, Side::exact(rhs), Side::exact(lhs), json!({"dim": a.dim, "boxes": a.boxes.len()}))
        .note("lhs is γ(A)^4, rhs is γ(A−A)"))
}

/// 1-D consequence of Borell: γ(A + B) ≥ Φ(Φ⁻¹(γ(A)) + Φ⁻¹(γ(B))) for intervals.
pub fn verify_borell_1d(a: (f64, f64), b: (f64, f64)) -> Result<LemmaReport> {
    ensure(a.0 <= a.1 && b.0 <= b.1, || "intervals need lo ≤ hi".into())?;
    let sd = gauss_sd();
    let ga = gaussian_interval_mass(a.0, a.1, sd);
    let gb = gaussian_interval_mass(b.0, b.1, sd);
    let gs = gaussian_interval_mass(a.0 + b.0, a.1 + b.1, sd);
    let bound = std_normal_cdf(std_normal_quantile(ga) + std_normal_quantile(gb));
    let verdict = verdict_exact_le(bound, gs, 1e-12);
    Ok(LemmaReport::new("Borell", RegimeTag::Lab, verdict, Side::exact(bound), Side::exact(gs), json!({"a": [a.0, a.1], "b": [b.0, b.1]})))
}

/// γ_k({‖x‖² ≥ k}) ≤ e^{−k/8}: Monte Carlo with the exact χ² value attached.
pub fn verify_gauss_tail(k: usize, budget: u64, seed: &SeedSpec) -> Result<LemmaReport> {
    ensure(k >= 1, || "k must be ≥ 1".into())?;
    let kf = k as f64;
    let est = mc_probability(seed, budget, || vec![0.0; k], |rng, x| {
        gaussian_point(rng, x);
        x.iter().map(|v| v * v).sum::<f64>() >= kf
    });
    let exact = 1.0 - ChiSquared::new(kf).map(|c| c.cdf(2.0 * std::f64::consts::PI * kf)).unwrap_or(0.0);
    let bound = (-kf / 8.0).exp();
    let verdict = verdict_prob_le(est.interval(), Interval::point(bound));
    Ok(LemmaReport::new("Gtail", RegimeTag::Lab, verdict, Side::from(&est), Side::exact(bound), json!({"k": k, "budget": budget, "exact_lhs": exact}))
        .with_seed(seed))
}

fn linf_range(lo: &[f64], hi: &[f64]) -> (f64, f64) {
    // smallest and largest ‖z‖∞ over the box
    let mut mn = 0.0f64;
    let mut mx = 0.0f64;
    for (&a, &b) in lo.iter().zip(hi) {
        let near = if a > 0.0 { a } else if b < 0.0 { -b } else { 0.0 };
        mn = mn.max(near);
        mx = mx.max(a.abs().max(b.abs()));
    }
    (mn, mx)
}

/// A point z of the box with s < ‖z‖∞ ≤ 16 of largest norm, if any.
fn shell_point(lo: &[f64], hi: &[f64], s: f64) -> Option<Vec<f64>> {
    let (mn, _) = linf_range(lo, hi);
    if mn > 16.0 {
        return None;
    }
    // nearest-to-origin point, then push one coordinate as far as allowed
    let base: Vec<f64> = lo.iter().zip(hi).map(|(&a, &b)| 0f64.clamp(a, b)).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for i in 0..lo.len() {
        for cand in [hi[i].min(16.0), lo[i].max(-16.0)] {
            if cand < lo[i] || cand > hi[i] {
                continue;
            }
            let mut z = base.clone();
            z[i] = cand;
            let nz = z.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if nz > s && nz <= 16.0 && best.as_ref().is_none_or(|b| nz > b.0) {
                best = Some((nz, z));
            }
        }
    }
    best.map(|b| b.1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosePointsReport {
    pub measure: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
}

/// If γ₂(S) ≥ 8s², exhibit x, y ∈ S with s < ‖x − y‖∞ ≤ 16.
pub fn verify_close_points(set: &BoxUnion, s: f64) -> Result<ClosePointsReport> {
    ensure(set.dim == 2, || "close-points check is two-dimensional".into())?;
    ensure(s > 0.0, || "s must be positive".into())?;
    let measure = set.gaussian_measure()?;
    let threshold = 8.0 * s * s;
    if measure < threshold {
        return Ok(ClosePointsReport { measure, threshold, verdict: Verdict::Vacuous, witness: None });
    }
    let mut witness = None;
    'outer: for a in &set.boxes {
        for b in &set.boxes {
            let d = b.minus(a);
            if let Some(z) = shell_point(&d.lo, &d.hi, s) {
                let x: Vec<f64> = (0..2)
                    .map(|i| {
                        let lo = a.lo[i].max(b.lo[i] - z[i]);
                        let hi = a.hi[i].min(b.hi[i] - z[i]);
                        match (lo.is_finite(), hi.is_finite()) {
                            (true, true) => 0.5 * (lo + hi),
                            (true, false) => lo,
                            (false, true) => hi,
                            _ => 0.0,
                        }
                    })
                    .collect();
                let y: Vec<f64> = (0..2).map(|i| (x[i] + z[i]).clamp(b.lo[i], b.hi[i])).collect();
                witness = Some((x, y));
                break 'outer;
            }
        }
    }
    let verdict = if witness.is_some() { Verdict::Holds } else { Verdict::Violated };
    Ok(ClosePointsReport { measure, threshold, verdict, witness })
}

/// Exact test of: for all x ∈ S, (Γ_{r,16} ∖ Γ_{r,s} + x) ∩ S = ∅.
pub fn empty_shell(set: &BoxUnion, r: f64, s: f64) -> bool {
    let k = set.dim - 2;
    for a in &set.boxes {
        for b in &set.boxes {
            let d = b.minus(a);
            let near: f64 = (0..k)
                .map(|i| {
                    let v = if d.lo[i] > 0.0 { d.lo[i] } else if d.hi[i] < 0.0 { -d.hi[i] } else { 0.0 };
                    v * v
                })
                .sum::<f64>()
                .sqrt();
            if near > r {
                continue;
            }
            let (mn, mx) = linf_range(&d.lo[k..], &d.hi[k..]);
            if mx > s && mn <= 16.0 {
                return false;
            }
        }
    }
    true
}

/// max over θ_[k] of γ₂(S(θ_[k])), exactly, with a maximizing θ_[k].
pub fn max_vertical_fiber(set: &BoxUnion) -> Result<(f64, Vec<f64>)> {
    ensure(set.dim >= 3, || "vertical fibers need dim ≥ 3".into())?;
    let k = set.dim - 2;
    let probes: Vec<Vec<f64>> = (0..k).map(|i| set.probe_values(i)).collect();
    let total: usize = probes.iter().map(|p| p.len()).product();
    ensure(total <= 1_000_000, || format!("{total} fiber probes exceed the cap"))?;
    let mut best = (0.0, vec![0.0; k]);
    let mut idx = vec![0usize; k];
    loop {
        let theta: Vec<f64> = idx.iter().enumerate().map(|(i, &j)| probes[i][j]).collect();
        let m = set.vertical_fiber(&theta)?.gaussian_measure()?;
        if m > best.0 {
            best = (m, theta);
        }
        let mut c = 0;
        while c < k {
            idx[c] += 1;
            if idx[c] < probes[c].len() {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
        if c == k {
            break;
        }
    }
    Ok(best)
}

/// Under the empty-shell hypothesis, max γ₂(S(θ_[k])) ≤ 8s².
pub fn verify_slice_bound(set: &BoxUnion, r: f64, s: f64) -> Result<LemmaReport> {
    let params = json!({"dim": set.dim, "r": r, "s": s, "boxes": set.boxes.len()});
    if !empty_shell(set, r, s) {
        return Ok(LemmaReport::new("slice-upperBound", RegimeTag::Lab, Verdict::Vacuous, Side::exact(f64::NAN), Side::exact(8.0 * s * s), params)
            .note("empty-shell hypothesis fails"));
    }
    let (m, _) = max_vertical_fiber(set)?;
    let bound = 8.0 * s * s;
    Ok(LemmaReport::new("slice-upperBound", RegimeTag::Lab, verdict_exact_le(m, bound, 1e-12), Side::exact(m), Side::exact(bound), params))
}

/// max over (a, b) of γ_k(F − F) for F the horizontal fiber at (a, b);
/// translation by y cancels in F − F, so y = 0 suffices.
pub fn max_fiber_diff_measure(set: &BoxUnion) -> Result<f64> {
    let k = set.dim - 2;
    let pa = set.probe_values(k);
    let pb = set.probe_values(k + 1);
    let zero = vec![0.0; set.dim];
    let mut best = 0.0f64;
    for &a in &pa {
        for &b in &pb {
            let f = set.horizontal_fiber(&zero, a, b)?;
            if !f.boxes.is_empty() {
                best = best.max(f.diffset()?.gaussian_measure()?);
            }
        }
    }
    Ok(best)
}

/// If 8s²e^{−k/8} + 64s²·max γ_k(F − F)^{1/4} < γ_{k+2}(S), the shell
/// (Γ_{2√k,16} ∖ Γ_{2√k,s} + x) meets S for some x ∈ S.
pub fn verify_geo_compare(set: &BoxUnion, s: f64) -> Result<LemmaReport> {
    ensure(set.dim >= 3, || "need k ≥ 1".into())?;
    let k = (set.dim - 2) as f64;
    let lhs = 8.0 * s * s * (-k / 8.0).exp() + 64.0 * s * s * max_fiber_diff_measure(set)?.powf(0.25);
    let g = set.gaussian_measure()?;
    let params = json!({"dim": set.dim, "s": s});
    if lhs >= g {
        return Ok(LemmaReport::new("geo-compare", RegimeTag::Lab, Verdict::Vacuous, Side::exact(lhs), Side::exact(g), params));
    }
    let met = !empty_shell(set, 2.0 * k.sqrt(), s);
    let verdict = if met { Verdict::Holds } else { Verdict::Violated };
    Ok(LemmaReport::new("geo-compare", RegimeTag::Lab, verdict, Side::exact(lhs), Side::exact(g), params))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleReport {
    pub pairs: usize,
    pub violations: usize,
    pub fiber_pairs: usize,
    pub fiber_violations: usize,
    pub verdict: Verdict,
}

/// S_W(m) − S_W(m) ⊆ S_W(4m) and the fiber version, on pairs of members
/// found by rejection from the window [−window, window]^ℓ.
pub fn verify_level_triangle(w: &RealMatrix, m: f64, trials: usize, window: f64, seed: &SeedSpec) -> Result<TriangleReport> {
    ensure(m >= 0.0 && window > 0.0, || "need m ≥ 0 and a positive window".into())?;
    let ell = w.cols();
    let cap = 4000 * trials.max(1) as u64;
    let mut rng = seed.rng(0);
    let draw = |rng: &mut LabRng, out: &mut [f64]| out.iter_mut().for_each(|x| *x = window * (2.0 * uniform01(rng) - 1.0));
    let mut members: Vec<Vec<f64>> = Vec::new();
    let mut x = vec![0.0; ell];
    let mut drawn = 0u64;
    while members.len() < 2 * trials && drawn < cap {
        draw(&mut rng, &mut x);
        drawn += 1;
        if level_value(w, &x) <= m {
            members.push(x.clone());
        }
    }
    let mut violations = 0;
    let pairs = members.len() / 2;
    for p in members.chunks_exact(2) {
        let d: Vec<f64> = p[0].iter().zip(&p[1]).map(|(a, b)| a - b).collect();
        if level_value(w, &d) > 4.0 * m * (1.0 + 1e-12) + 1e-15 {
            violations += 1;
        }
    }
    // fibers at a random (y, a, b), needs ℓ ≥ 3
    let (mut fiber_pairs, mut fiber_violations) = (0, 0);
    if ell >= 3 {
        let k = ell - 2;
        let mut frng = seed.child("fiber").rng(0);
        let y: Vec<f64> = (0..ell).map(|_| window * (2.0 * uniform01(&mut frng) - 1.0) * 0.1).collect();
        // choose (a, b) so that the fiber is populated: take it from a member
        if let Some(base) = members.first() {
            let (a, b) = (base[k] - y[k], base[k + 1] - y[k + 1]);
            let mut found: Vec<Vec<f64>> = Vec::new();
            let mut t = vec![0.0; k];
            let mut full = vec![0.0; ell];
            let mut drawn = 0u64;
            while found.len() < 2 * trials && drawn < cap {
                draw(&mut frng, &mut t);
                drawn += 1;
                for i in 0..k {
                    full[i] = t[i] + y[i];
                }
                full[k] = a + y[k];
                full[k + 1] = b + y[k + 1];
                if level_value(w, &full) <= m {
                    found.push(t.clone());
                }
            }
            for p in found.chunks_exact(2) {
                let mut d: Vec<f64> = p[0].iter().zip(&p[1]).map(|(u, v)| u - v).collect();
                d.extend([0.0, 0.0]);
                fiber_pairs += 1;
                if level_value(w, &d) > 4.0 * m * (1.0 + 1e-12) + 1e-15 {
                    fiber_violations += 1;
                }
            }
        }
    }
    let verdict = if violations + fiber_violations > 0 {
        Verdict::Violated
    } else if pairs < trials {
        Verdict::Inconclusive
    } else {
        Verdict::Holds
    };
    Ok(TriangleReport { pairs, violations, fiber_pairs, fiber_violations, verdict })
}

/// Count of uniform window draws in S_W(t); used for monotonicity checks.
pub fn level_hits(w: &RealMatrix, ts: &[f64], budget: u64, window: f64, seed: &SeedSpec) -> Vec<u64> {
    let ell = w.cols();
    ts.iter()
        .map(|&t| {
            mc_count(seed, budget, || vec![0.0; ell], |rng, x| {
                x.iter_mut().for_each(|v| *v = window * (2.0 * uniform01(rng) - 1.0));
                level_value(w, x) <= t
            })
        })
        .collect()
}

/// Box union from explicit `[lo, hi]` pairs per box.
pub fn union_from(dim: usize, spec: &[(&[f64], &[f64])]) -> Result<BoxUnion> {
    let boxes = spec.iter().map(|(lo, hi)| AxisBox::new(lo.to_vec(), hi.to_vec())).collect::<Result<Vec<_>>>()?;
    BoxUnion::new(dim, boxes)
}

/// torus_norm(Wθ) with θ given; convenience for callers holding a spec.
pub fn level_norm(w: &RealMatrix, theta: &[f64]) -> Result<f64> {
    Ok(torus_norm(&w.mul_vec(theta)?))
}
