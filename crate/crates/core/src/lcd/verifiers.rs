//! Conditioned inverse Littlewood–Offord verifiers built on the LCD search.

use rand::RngCore;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::concentration::levy_mc;
use crate::error::{ensure, LabError, Result};
use crate::lcd::search::{lcd, LcdResult};
use crate::mc::{mc_collect, mc_probability};
use crate::numerics::matrix::{dot, norm2, RealMatrix};
use crate::numerics::special::std_normal_quantile;
use crate::numerics::svd::{op_norm, svd};
use crate::regime::{RegimeConstants, RegimeTag};
use crate::report::{LemmaReport, Side};
use crate::rng::{uniform01, LabRng, SeedSpec};
use crate::sample::LazyLaw;
use crate::stats::{clopper_pearson, verdict_le, verdict_prob_le, Interval, McEstimate, Verdict, DEFAULT_CONFIDENCE};

/// LCD threshold used by every conditioned-walk statement.
pub const LCD_TARGET: f64 = 16.0;
const LCD_RES: f64 = 1e-3;

/// W_Y = [W, (0_d; Y), (Y; 0_d)] for a 2d×k matrix W and Y ∈ Rᵈ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedMatrix {
    pub w: RealMatrix,
    pub y: Vec<f64>,
}

impl AugmentedMatrix {
    pub fn new(w: RealMatrix, y: Vec<f64>) -> Result<Self> {
        if w.rows() != 2 * y.len() {
            return Err(LabError::DimensionMismatch { expected: 2 * y.len(), got: w.rows() });
        }
        Ok(Self { w, y })
    }

    pub fn d(&self) -> usize {
        self.y.len()
    }

    pub fn k(&self) -> usize {
        self.w.cols()
    }

    pub fn assemble(&self) -> RealMatrix {
        let (d, k) = (self.d(), self.k());
        RealMatrix::from_fn(2 * d, k + 2, |i, j| {
            if j < k {
                self.w.data()[i * k + j]
            } else if j == k {
                if i >= d { self.y[i - d] } else { 0.0 }
            } else if i < d {
                self.y[i]
            } else {
                0.0
            }
        })
    }
}

fn lazy_dot_into(w: &RealMatrix, tau: &[i8], out: &mut [f64]) {
    out.fill(0.0);
    for (i, &t) in tau.iter().enumerate() {
        if t != 0 {
            let tf = t as f64;
            out.iter_mut().zip(w.row(i)).for_each(|(o, a)| *o += tf * a);
        }
    }
}

/// Constants (R, c₁, c₂) of the inverse Littlewood–Offord theorem; none are
/// given numerically, so callers always supply them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LwoConstants {
    pub r: f64,
    pub c1: f64,
    pub c2: f64,
}

impl From<&RegimeConstants> for LwoConstants {
    fn from(c: &RegimeConstants) -> Self {
        Self { r: c.lwo_r, c1: c.lwo_c1, c2: c.lwo_c2 }
    }
}

fn orthonormal_rows(w: &RealMatrix, tol: f64) -> bool {
    (0..w.rows()).all(|i| (0..w.rows()).all(|j| (dot(w.row(i), w.row(j)) - if i == j { 1.0 } else { 0.0 }).abs() <= tol))
}

/// Implication check: P(|⟨τ,v⟩| ≤ t, ‖Wτ‖₂ ≤ c₂√k) ≥ Rte^{−c₁k} ⇒ D_α(v) ≤ 16/t.
///
/// `w` is k×d with orthonormal rows (k may be zero). A certified conclusion
/// makes the implication hold outright; a certified-false hypothesis makes it
/// vacuous; a violation needs both a certified hypothesis and a certified
/// failure of the conclusion.
pub fn verify_inverse_lwo(
    v: &[f64],
    w: &RealMatrix,
    alpha: f64,
    t: f64,
    consts: LwoConstants,
    budget: u64,
    seed: &SeedSpec,
) -> Result<LemmaReport> {
    let d = v.len();
    ensure((norm2(v) - 1.0).abs() <= 1e-9, || "v must be a unit vector".into())?;
    ensure(t > 0.0, || format!("t={t} must be positive"))?;
    ensure(consts.r.is_finite() && consts.c1.is_finite() && consts.c2.is_finite(), || "theorem constants must be configured".into())?;
    let k = w.rows();
    if k > 0 && w.cols() != d {
        return Err(LabError::DimensionMismatch { expected: d, got: w.cols() });
    }
    ensure(orthonormal_rows(w, 1e-9), || "rows of W must be orthonormal".into())?;
    let params = json!({
        "d": d, "k": k, "alpha": alpha, "t": t, "R": consts.r, "c1": consts.c1, "c2": consts.c2, "budget": budget,
    });
    let pre_ok = k as f64 <= consts.c1 * alpha * d as f64 + 1e-12 && t >= (-consts.c1 * alpha * d as f64).exp();
    let threshold = consts.r * t * (-consts.c1 * k as f64).exp();
    if !pre_ok {
        return Ok(LemmaReport::new("invLwO", RegimeTag::Lab, Verdict::PreconditionsUnmet, Side::exact(f64::NAN), Side::exact(threshold), params)
            .with_seed(seed)
            .note("needs k ≤ c₁αd and t ≥ exp(−c₁αd)"));
    }
    let law = LazyLaw::new(0.25)?;
    let r2 = consts.c2 * consts.c2 * k as f64;
    let p = mc_probability(seed, budget, || (vec![0i8; d], vec![0.0; k]), |rng, (tau, wt)| {
        law.fill(rng, tau);
        let s: f64 = tau.iter().zip(v).map(|(&a, b)| a as f64 * b).sum();
        if s.abs() > t {
            return false;
        }
        if k == 0 {
            return true;
        }
        wt.iter_mut().enumerate().for_each(|(i, o)| *o = tau.iter().zip(w.row(i)).map(|(&a, b)| a as f64 * b).sum());
        wt.iter().map(|x| x * x).sum::<f64>() <= r2
    });
    let target = LCD_TARGET / t;
    let l = lcd(v, alpha, target * 1.01 + 1.0, LCD_RES)?;
    let conclusion_true = l.at_most(target);
    let conclusion_false = l.exceeds(target);
    let hyp = p.interval();
    let verdict = if conclusion_true {
        Verdict::Holds
    } else if hyp.hi < threshold {
        Verdict::Vacuous
    } else if hyp.lo >= threshold && conclusion_false {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    };
    let mut params = params;
    params["lcd_low"] = json!(l.bracket_low);
    params["lcd_high"] = json!(finite_or_null(l.bracket_high));
    params["lcd_status"] = json!(l.status.as_str());
    Ok(LemmaReport::new("invLwO", RegimeTag::Lab, verdict, Side::from(&p), Side::exact(threshold), params)
        .with_seed(seed)
        .note("lhs is the hypothesis probability; rhs its threshold; the verdict is for the implication"))
}

fn finite_or_null(x: f64) -> serde_json::Value {
    if x.is_finite() { json!(x) } else { serde_json::Value::Null }
}

/// Contrapositive check of the conditioned-walk LCD lemma:
/// D_α(Y) > 16 ⇒ L(W_Yᵀτ, c₀^{1/2}√(k+1)) ≤ (R t)² e^{−c₀k}, τ ∼ Q(2d, 1/4).
pub fn verify_cond_walk_lcd(
    y: &[f64],
    w: &RealMatrix,
    consts: &RegimeConstants,
    t: f64,
    budget: u64,
    seed: &SeedSpec,
) -> Result<LemmaReport> {
    let aug = AugmentedMatrix::new(w.clone(), y.to_vec())?;
    let (d, k) = (aug.d(), aug.k());
    let (c0, r, alpha) = (consts.c0, consts.r_lcd, consts.alpha);
    ensure(t > 0.0 && t <= 1.0, || format!("t={t} must lie in (0,1]"))?;
    let bound = (r * t).powi(2) * (-c0 * k as f64).exp();
    let wn = if k == 0 { 0.0 } else { op_norm(w)? };
    let hs = w.hs_norm();
    let ynorm = norm2(y);
    let mut params = json!({
        "d": d, "k": k, "t": t, "c0": c0, "R": r, "alpha": alpha, "budget": budget,
        "w_op": wn, "w_hs": hs, "y_norm": ynorm,
    });
    let mut unmet = Vec::new();
    if wn > 2.0 + 1e-12 {
        unmet.push("‖W‖ ≤ 2");
    }
    if hs < (k as f64).sqrt() / 2.0 - 1e-12 {
        unmet.push("‖W‖_HS ≥ √k/2");
    }
    if ynorm < 2f64.powi(-10) * c0 / t {
        unmet.push("‖Y‖ ≥ 2⁻¹⁰c₀/t");
    }
    if consts.tag == RegimeTag::Paper {
        if k as f64 > 2f64.powi(-10) * alpha * d as f64 {
            unmet.push("k ≤ 2⁻¹⁰αd");
        }
        if t < (-(2f64.powi(-9)) * alpha * d as f64).exp() {
            unmet.push("t ≥ exp(−2⁻⁹αd)");
        }
    }
    let tag_note = |rep: LemmaReport| if consts.tag == RegimeTag::Lab { rep.note("lab-constants") } else { rep };
    if !unmet.is_empty() {
        params["unmet"] = json!(unmet);
        let rep = LemmaReport::new("CondWalkLCMfinal", consts.tag, Verdict::PreconditionsUnmet, Side::exact(f64::NAN), Side::exact(bound), params)
            .with_seed(seed);
        return Ok(tag_note(rep));
    }
    let l = lcd(y, alpha, 2.0 * LCD_TARGET, LCD_RES)?;
    params["lcd_low"] = json!(l.bracket_low);
    params["lcd_status"] = json!(l.status.as_str());
    if !l.exceeds(LCD_TARGET) {
        let verdict = if l.at_most(LCD_TARGET) { Verdict::Vacuous } else { Verdict::Inconclusive };
        let rep = LemmaReport::new("CondWalkLCMfinal", consts.tag, verdict, Side::exact(f64::NAN), Side::exact(bound), params)
            .with_seed(seed)
            .note("hypothesis D_α(Y) > 16 not certified");
        return Ok(tag_note(rep));
    }
    let wy = aug.assemble();
    let law = LazyLaw::new(0.25)?;
    let radius = c0.sqrt() * ((k + 1) as f64).sqrt();
    let lev = levy_mc(
        k + 2,
        |rng, x| {
            x.fill(0.0);
            for i in 0..2 * d {
                let tau = law.draw(rng);
                if tau != 0 {
                    let tf = tau as f64;
                    x.iter_mut().zip(wy.row(i)).for_each(|(o, a)| *o += tf * a);
                }
            }
        },
        radius,
        &[],
        budget,
        &seed.child("levy"),
    )?;
    params["centers"] = json!(lev.candidates);
    let lhs = Side::from(&lev.estimate);
    let verdict = verdict_prob_le(lhs.interval(), Interval::point(bound));
    let rep = LemmaReport::new("CondWalkLCMfinal", consts.tag, verdict, lhs, Side::exact(bound), params)
        .with_seed(seed)
        .note("lhs is a candidate-center lower-bound estimate of L");
    Ok(tag_note(rep))
}

/// Median of sorted samples with a distribution-free order-statistic interval.
pub fn median_interval(sorted: &[f64], confidence: f64) -> (f64, f64, f64) {
    let n = sorted.len();
    assert!(n > 0, "median of no samples");
    let z = std_normal_quantile(0.5 + confidence / 2.0);
    let half = z * (n as f64).sqrt() / 2.0;
    let lo = ((n as f64 / 2.0 - half).floor().max(0.0)) as usize;
    let hi = ((n as f64 / 2.0 + half).ceil() as usize).min(n - 1);
    (sorted[(n - 1) / 2], sorted[lo], sorted[hi])
}

/// P(‖Wᵀσ‖₂ ≤ δ√k) ≤ 4exp(−2⁻¹²νk) for σ ∼ Q(2d, ν), with the median
/// diagnostic med(‖Wᵀσ‖₂/‖W‖) ≥ √(ν/2)‖W‖_HS/‖W‖.
pub fn verify_hanson_wright(w: &RealMatrix, nu: f64, delta: f64, budget: u64, seed: &SeedSpec) -> Result<LemmaReport> {
    ensure(nu > 0.0 && nu <= 1.0, || format!("ν={nu} outside (0,1]"))?;
    let (rows, k) = (w.rows(), w.cols());
    ensure(k >= 1, || "W needs at least one column".into())?;
    let wn = op_norm(w)?;
    let hs = w.hs_norm();
    let bound = 4.0 * (-(2f64.powi(-12)) * nu * k as f64).exp();
    let mut params = json!({"rows": rows, "k": k, "nu": nu, "delta": delta, "budget": budget, "w_op": wn, "w_hs": hs});
    let mut unmet = Vec::new();
    if hs < (k as f64).sqrt() / 2.0 - 1e-12 {
        unmet.push("‖W‖_HS ≥ √k/2");
    }
    if wn > 2.0 + 1e-12 {
        unmet.push("‖W‖ ≤ 2");
    }
    if !(delta > 0.0 && delta < nu.sqrt() / 16.0) {
        unmet.push("0 < δ < √ν/16");
    }
    if !unmet.is_empty() {
        params["unmet"] = json!(unmet);
        return Ok(LemmaReport::new("HansonWright", RegimeTag::Paper, Verdict::PreconditionsUnmet, Side::exact(f64::NAN), Side::exact(bound), params)
            .with_seed(seed));
    }
    let law = LazyLaw::new(nu)?;
    let mut norms = mc_collect(seed, budget, || (vec![0i8; rows], vec![0.0; k]), |rng, (s, out)| {
        law.fill(rng, s);
        lazy_dot_into(w, s, out);
        norm2(out)
    });
    norms.sort_by(f64::total_cmp);
    let cut = delta * (k as f64).sqrt();
    let hits = norms.partition_point(|&x| x <= cut) as u64;
    let est = McEstimate::binomial(hits, budget, Some(seed.clone()), DEFAULT_CONFIDENCE);
    let lhs = Side::from(&est);
    let mut verdict = verdict_prob_le(lhs.interval(), Interval::point(bound));
    let mut notes = Vec::new();
    if verdict == Verdict::Vacuous {
        notes.push("vacuous-scale".to_string());
    }
    // Median diagnostic, on F = ‖Wᵀσ‖₂/‖W‖; only derived when ‖W‖²_HS > 8/ν.
    let (med, med_lo, med_hi) = median_interval(&norms, DEFAULT_CONFIDENCE);
    let thr = (nu / 2.0).sqrt() * hs / wn;
    let applicable = hs * hs > 8.0 / nu;
    let diag = if !applicable {
        Verdict::Vacuous
    } else if med_lo / wn >= thr {
        Verdict::Holds
    } else if med_hi / wn < thr {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    };
    params["median"] = json!(med / wn);
    params["median_ci"] = json!([med_lo / wn, med_hi / wn]);
    params["median_threshold"] = json!(thr);
    params["median_diagnostic"] = json!(diag.as_str());
    match diag {
        Verdict::Violated => verdict = Verdict::Violated,
        Verdict::Inconclusive if verdict != Verdict::Violated => verdict = Verdict::Inconclusive,
        _ => {}
    }
    let mut rep = LemmaReport::new("HansonWright", RegimeTag::Paper, verdict, lhs, Side::exact(bound), params).with_seed(seed);
    for n in notes {
        rep = rep.note(n);
    }
    Ok(rep)
}

/// P(‖HW‖_HS ≤ β²√((k+1)(n−d))) ≤ (2⁵e^{2β²k}L(Wᵀτ, β√(k+1)))^{n−d}, where W is
/// 2d×(k+2) and H has n−d independent rows τ ∼ Q(2d, μ).
pub fn verify_tensorization(w: &RealMatrix, mu: f64, beta: f64, n: usize, d: usize, budget: u64, seed: &SeedSpec) -> Result<LemmaReport> {
    ensure(beta > 0.0 && beta < 0.125, || format!("β={beta} outside (0, 1/8)"))?;
    ensure(w.rows() == 2 * d, || format!("W has {} rows, expected 2d={}", w.rows(), 2 * d))?;
    ensure(w.cols() >= 2, || "W needs k+2 ≥ 2 columns".into())?;
    ensure(n > d, || format!("need n > d, got n={n}, d={d}"))?;
    let k = w.cols() - 2;
    let m = n - d;
    let law = LazyLaw::new(mu)?;
    let cols = w.cols();
    let cut2 = beta.powi(4) * ((k + 1) * m) as f64 * (1.0 + 1e-12);
    let lhs_est = mc_probability(&seed.child("lhs"), budget, || (vec![0i8; 2 * d], vec![0.0; cols]), |rng, (tau, out)| {
        let mut s = 0.0;
        for _ in 0..m {
            law.fill(rng, tau);
            lazy_dot_into(w, tau, out);
            s += out.iter().map(|x| x * x).sum::<f64>();
            if s > cut2 {
                return false;
            }
        }
        true
    });
    let lev = levy_mc(
        cols,
        |rng, x| {
            let mut tau = vec![0i8; 2 * d];
            law.fill(rng, &mut tau);
            lazy_dot_into(w, &tau, x);
        },
        beta * ((k + 1) as f64).sqrt(),
        &[],
        budget,
        &seed.child("levy"),
    )?;
    let f = 32.0 * (2.0 * beta * beta * k as f64).exp();
    let pow = |x: f64| (f * x).powi(m as i32);
    let rhs = Side { hat: pow(lev.estimate.p_hat), lo: pow(lev.estimate.ci_low), hi: pow(lev.estimate.ci_high) };
    let lhs = Side::from(&lhs_est);
    let verdict = verdict_le(lhs.interval(), rhs.interval());
    Ok(LemmaReport::new(
        "tensor",
        RegimeTag::Paper,
        verdict,
        lhs,
        rhs,
        json!({"n": n, "d": d, "k": k, "mu": mu, "beta": beta, "budget": budget, "centers": lev.candidates}),
    )
    .with_seed(seed)
    .note("rhs uses a candidate-center lower-bound estimate of L"))
}

/// Event parameters for the robust-rank estimate; H is (n−d)×2d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankEventSpec {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub c0: f64,
}

impl RankEventSpec {
    pub fn new(n: usize, d: usize, k: usize, c0: f64) -> Result<Self> {
        ensure(d >= 1 && d < n, || format!("need 1 ≤ d < n, got d={d}, n={n}"))?;
        ensure(k <= 2 * d, || format!("need k ≤ 2d, got k={k}"))?;
        ensure(c0 > 0.0, || "c₀ must be positive".into())?;
        Ok(Self { n, d, k, c0 })
    }

    /// c₀√n/16.
    pub fn sigma_cut(&self) -> f64 {
        self.c0 * (self.n as f64).sqrt() / 16.0
    }

    pub fn ball_radius(&self) -> f64 {
        self.n as f64
    }

    /// r_n = c₀/(16√n).
    pub fn r_n(&self) -> f64 {
        self.c0 / (16.0 * (self.n as f64).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEventReport {
    pub estimate: McEstimate,
    /// `histogram[j]` counts samples in E_j (exactly j singular values below the cut).
    pub histogram: Vec<u64>,
}

/// P_H(σ_{2d−k+1}(H) ≤ c₀√n/16 and ‖H₁X‖₂, ‖H₂X‖₂ ≤ n), with σ_j = 0 for j > 2d.
pub fn rank_event_mc(spec: &RankEventSpec, x: &[f64], mu: f64, budget: u64, seed: &SeedSpec) -> Result<RankEventReport> {
    let RankEventSpec { n, d, k, .. } = *spec;
    if x.len() != d {
        return Err(LabError::DimensionMismatch { expected: d, got: x.len() });
    }
    let law = LazyLaw::new(mu)?;
    let m = n - d;
    let cut = spec.sigma_cut();
    let r2 = spec.ball_radius().powi(2) * (1.0 + 1e-12);
    let draws: Vec<Result<(bool, usize)>> = mc_collect(seed, budget, || vec![0i8; m * 2 * d], |rng, h| {
        law.fill(rng, h);
        let (mut n1, mut n2) = (0.0, 0.0);
        for i in 0..m {
            let row = &h[i * 2 * d..(i + 1) * 2 * d];
            let a: f64 = row[..d].iter().zip(x).map(|(&e, b)| e as f64 * b).sum();
            let b: f64 = row[d..].iter().zip(x).map(|(&e, b)| e as f64 * b).sum();
            n1 += a * a;
            n2 += b * b;
        }
        let hm = RealMatrix::from_fn(m, 2 * d, |i, j| h[i * 2 * d + j] as f64);
        let s = svd(&hm)?;
        let below = (1..=2 * d).filter(|&j| s.sigma(j) < cut).count();
        let sig_ok = k == 0 || s.sigma(2 * d - k + 1) <= cut;
        Ok((sig_ok && n1 <= r2 && n2 <= r2, below))
    });
    let mut histogram = vec![0u64; 2 * d + 1];
    let mut hits = 0u64;
    for r in draws {
        let (ev, below) = r?;
        histogram[below] += 1;
        hits += ev as u64;
    }
    Ok(RankEventReport { estimate: McEstimate::binomial(hits, budget, Some(seed.clone()), DEFAULT_CONFIDENCE), histogram })
}

/// The robust-rank bound e^{−c₀nk/4}(R/N)^{2n−2d}, checked when D_α(r_n X) > 16
/// is certified and ‖X‖₂ ≥ c₀2⁻¹⁰√n·N.
pub fn verify_rank_h(spec: &RankEventSpec, x: &[f64], big_n: f64, consts: &RegimeConstants, budget: u64, seed: &SeedSpec) -> Result<LemmaReport> {
    let RankEventSpec { n, d, k, c0 } = *spec;
    let bound = (-c0 * (n * k) as f64 / 4.0).exp() * (consts.r_rank / big_n).powi((2 * n - 2 * d) as i32);
    let scaled: Vec<f64> = x.iter().map(|v| spec.r_n() * v).collect();
    let l = lcd(&scaled, consts.alpha, 2.0 * LCD_TARGET, LCD_RES)?;
    let norm_ok = norm2(x) >= c0 * 2f64.powi(-10) * (n as f64).sqrt() * big_n;
    let rep = rank_event_mc(spec, x, consts.mu, budget, seed)?;
    let mut params = json!({
        "n": n, "d": d, "k": k, "c0": c0, "N": big_n, "R": consts.r_rank, "alpha": consts.alpha, "mu": consts.mu,
        "budget": budget, "sigma_cut": spec.sigma_cut(), "lcd_low": l.bracket_low, "histogram": rep.histogram,
    });
    let lhs = Side::from(&rep.estimate);
    let verdict = if !norm_ok || !l.exceeds(LCD_TARGET) {
        params["unmet"] = json!(if norm_ok { "D_α(r_n X) > 16 not certified" } else { "‖X‖ ≥ c₀2⁻¹⁰√nN" });
        Verdict::PreconditionsUnmet
    } else {
        verdict_prob_le(lhs.interval(), Interval::point(bound))
    };
    let mut out = LemmaReport::new("rankH", consts.tag, verdict, lhs, Side::exact(bound), params).with_seed(seed);
    if consts.tag == RegimeTag::Lab {
        out = out.note("lab-constants");
    }
    Ok(out)
}

/// K in the rarity statement.
pub const RARITY_K: f64 = 16.0;
/// Smallest bound the rarity experiment attempts to resolve.
pub const RARITY_MIN_BOUND: f64 = 1e-3;

/// Uniform draw from [−κN, −N] ∪ [N, κN].
fn flat_coordinate(rng: &mut LabRng, big_n: f64, kappa: f64) -> f64 {
    let u = uniform01(rng);
    let mag = big_n + (kappa - 1.0) * big_n * u;
    if rng.next_u32() & 1 == 0 { mag } else { -mag }
}

/// Empirical P(D_α(r_n·X) ≤ 16) for X uniform on ([−κN,−N]∪[N,κN])ᵈ against (2²⁰α)^{d/4}.
///
/// Samples whose LCD bracket straddles 16 count as hits, so the frequency is
/// an upper estimate.
pub fn lcd_rarity_experiment(d: usize, n: usize, big_n: f64, kappa: f64, alpha: f64, c0: f64, budget: u64, seed: &SeedSpec) -> Result<LemmaReport> {
    ensure(alpha > 0.0 && alpha < 1.0, || format!("α={alpha} outside (0,1)"))?;
    ensure(n >= d && d >= 1, || format!("need n ≥ d ≥ 1, got n={n}, d={d}"))?;
    let bound = (2f64.powi(20) * alpha).powf(d as f64 / 4.0);
    let r_n = c0 / (16.0 * (n as f64).sqrt());
    let mut params = json!({"d": d, "n": n, "N": big_n, "kappa": kappa, "alpha": alpha, "c0": c0, "K": RARITY_K, "budget": budget, "r_n": r_n});
    let mut unmet = Vec::new();
    if kappa < 2.0 {
        unmet.push("κ ≥ 2".to_string());
    }
    if big_n < 2.0 {
        unmet.push("N ≥ 2".to_string());
    }
    if RARITY_K * big_n >= 2f64.powi(d as i32) {
        unmet.push("KN < 2^d".to_string());
    }
    if bound < RARITY_MIN_BOUND {
        let suggest = 2f64.powi(-20) * 0.1f64.powf(4.0 / d as f64);
        unmet.push(format!("bound {bound:e} below 10⁻³ is unmeasurable; try α ≈ {suggest:e}"));
    }
    if !unmet.is_empty() {
        params["unmet"] = json!(unmet);
        return Ok(LemmaReport::new("lcd-rare", RegimeTag::Lab, Verdict::PreconditionsUnmet, Side::exact(f64::NAN), Side::exact(bound), params)
            .with_seed(seed));
    }
    let strict_pre = d as f64 >= RARITY_K * RARITY_K / alpha;
    // The scan only needs to decide "≤ 16 or not", so a coarse grid is enough;
    // the certificate makes it exact regardless of the step.
    let hits = crate::mc::mc_count(seed, budget, || vec![0.0; d], |rng, x| {
        for xi in x.iter_mut() {
            *xi = r_n * flat_coordinate(rng, big_n, kappa);
        }
        match lcd(x, alpha, RARITY_K * 1.0625, 0.25) {
            Ok(r) => !r.exceeds(RARITY_K),
            Err(_) => true,
        }
    });
    let est = McEstimate::binomial(hits, budget, Some(seed.clone()), DEFAULT_CONFIDENCE);
    let lhs = Side::from(&est);
    let verdict = verdict_prob_le(lhs.interval(), Interval::point(bound));
    let mut rep = LemmaReport::new("lcd-rare", RegimeTag::Lab, verdict, lhs, Side::exact(bound), params).with_seed(seed);
    if !strict_pre {
        rep = rep.note("d ≥ K²/α does not hold at this scale; run as a lab check");
    }
    if verdict == Verdict::Vacuous {
        rep = rep.note("bound ≥ 1");
    }
    Ok(rep)
}

/// Lab α putting (2²⁰α)^{d/4} at `target`.
pub fn rarity_alpha_for(d: usize, target: f64) -> f64 {
    2f64.powi(-20) * target.powf(4.0 / d as f64)
}

/// (P_M(‖MX‖₂ ≤ n))² ≤ P_H(A₁ ∩ A₂).
///
/// Both sides are estimated independently. The same H-samples also replay the
/// pointwise inclusion {‖M₁X‖ ≤ n} ∩ {‖M₂X‖ ≤ n} ⊆ A₁ ∩ A₂ for the two zeroed
/// matrices built from H₁, H₂; any failure there is a violation.
pub fn verify_second_moment(x: &[f64], n: usize, d: usize, mu: f64, budget: u64, seed: &SeedSpec) -> Result<LemmaReport> {
    if x.len() != n {
        return Err(LabError::DimensionMismatch { expected: n, got: x.len() });
    }
    ensure(d >= 1 && d < n, || format!("need 1 ≤ d < n, got d={d}"))?;
    let law = LazyLaw::new(mu)?;
    let m = n - d;
    let nf = n as f64;
    let r2 = nf * nf * (1.0 + 1e-12);
    let (xd, xr) = x.split_at(d);
    // (‖H₁X_[d]‖², ‖H₁ᵀX_rest‖²) for a fresh block.
    let parts = |rng: &mut LabRng, h: &mut Vec<i8>, acc: &mut Vec<f64>| -> (f64, f64) {
        law.fill(rng, h);
        acc.clear();
        acc.resize(d, 0.0);
        let mut lower = 0.0;
        for i in 0..m {
            let row = &h[i * d..(i + 1) * d];
            let mut s = 0.0;
            for (j, &e) in row.iter().enumerate() {
                if e != 0 {
                    let ef = e as f64;
                    s += ef * xd[j];
                    acc[j] += ef * xr[i];
                }
            }
            lower += s * s;
        }
        (lower, acc.iter().map(|a| a * a).sum())
    };
    let p = mc_probability(&seed.child("lhs"), budget, || (vec![0i8; m * d], Vec::new()), |rng, (h, acc)| {
        let (a, b) = parts(rng, h, acc);
        a + b <= r2
    });
    let counts = crate::mc::mc_fold(
        &seed.child("rhs"),
        budget,
        || ((0u64, 0u64), vec![0i8; m * d], Vec::new()),
        |rng, (c, h, acc)| {
            let (a1, b1) = parts(rng, h, acc);
            let (a2, b2) = parts(rng, h, acc);
            let event = a1 <= r2 && a2 <= r2 && b1 + b2 <= 4.0 * r2;
            if event {
                c.0 += 1;
            }
            if a1 + b1 <= r2 && a2 + b2 <= r2 && !event {
                c.1 += 1;
            }
        },
        |x, y| {
            x.0 .0 += y.0 .0;
            x.0 .1 += y.0 .1;
        },
    )
    .0;
    let q = McEstimate::binomial(counts.0, budget, Some(seed.child("rhs")), DEFAULT_CONFIDENCE);
    let lhs = Side { hat: p.p_hat.powi(2), lo: p.ci_low.powi(2), hi: p.ci_high.powi(2) };
    let rhs = Side::from(&q);
    let saturated = p.p_hat == 1.0 && q.p_hat == 1.0;
    let verdict = if counts.1 > 0 {
        Verdict::Violated
    } else if saturated {
        // Every sample lands in both events: the equality case.
        Verdict::Holds
    } else {
        verdict_le(lhs.interval(), rhs.interval())
    };
    let rep = LemmaReport::new(
        "2ndMoment",
        RegimeTag::Paper,
        verdict,
        lhs,
        rhs,
        json!({"n": n, "d": d, "mu": mu, "budget": budget, "inclusion_failures": counts.1, "x_norm": norm2(x)}),
    )
    .with_seed(seed);
    Ok(if saturated { rep.note("both events held on every sample") } else { rep })
}

/// Rate check for P_X(‖HX‖₂ ≤ n), X uniform on a product of N-point integer
/// windows: doubling N should shrink it by about 2^{−(2d−k)}.
///
/// `h` is 2d×(n−d) with σ_{2d−k}(h) ≥ c₀√n/16 (certified by SVD). Each
/// consecutive pair of N values yields a slope; the report holds when every
/// slope's upper CI is at most −(2d−k−0.5)·log 2.
pub fn verify_projection_decay(h: &RealMatrix, k: usize, c0: f64, n: usize, big_ns: &[u64], budget: u64, seed: &SeedSpec) -> Result<LemmaReport> {
    let two_d = h.rows();
    let m = h.cols();
    ensure(two_d.is_multiple_of(2) && 2 * k < two_d, || format!("need 2d even with 2d > 2k, got 2d={two_d}, k={k}"))?;
    ensure(big_ns.len() >= 2, || "need at least two N values".into())?;
    ensure(big_ns.windows(2).all(|w| w[1] == 2 * w[0]), || "N values must double".into())?;
    let s = svd(h)?;
    let sig = s.sigma(two_d - k);
    let gap_ok = sig >= c0 * (n as f64).sqrt() / 16.0;
    let rank = two_d - k;
    let target = -((rank as f64) - 0.5) * std::f64::consts::LN_2;
    let r2 = (n as f64).powi(2) * (1.0 + 1e-12);
    let mut ests = Vec::new();
    for &nn in big_ns {
        let lo = -((nn as i64 - 1) / 2);
        let e = mc_probability(&seed.child(nn), budget, || (vec![0.0; m], vec![0.0; two_d]), |rng, (x, hx)| {
            for xi in x.iter_mut() {
                *xi = (lo + ((rng.next_u64() as u128 * nn as u128) >> 64) as i64) as f64;
            }
            for (i, o) in hx.iter_mut().enumerate() {
                *o = dot(h.row(i), x);
            }
            hx.iter().map(|v| v * v).sum::<f64>() <= r2
        });
        ests.push(e);
    }
    // Bonferroni over the slopes: each slope uses two intervals.
    let conf = 1.0 - (1.0 - DEFAULT_CONFIDENCE) / (2 * (big_ns.len() - 1)) as f64;
    let mut slopes = Vec::new();
    let mut verdicts = Vec::new();
    let mut worst = Side::exact(f64::NEG_INFINITY);
    for w in ests.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let ka = (a.p_hat * a.samples as f64).round() as u64;
        let kb = (b.p_hat * b.samples as f64).round() as u64;
        let (alo, ahi) = clopper_pearson(ka, a.samples, conf);
        let (blo, bhi) = clopper_pearson(kb, b.samples, conf);
        let side = Side { hat: (b.p_hat / a.p_hat).ln(), lo: (blo / ahi).ln(), hi: (bhi / alo).ln() };
        verdicts.push(if ka == 0 { Verdict::Inconclusive } else { verdict_le(side.interval(), Interval::point(target)) });
        if side.hi > worst.hi || worst.hi.is_nan() {
            worst = side;
        }
        slopes.push(side.hat);
    }
    let verdict = if !gap_ok { Verdict::PreconditionsUnmet } else { crate::stats::combine(verdicts) };
    Ok(LemmaReport::new(
        "LwO-for-AX",
        RegimeTag::Lab,
        verdict,
        worst,
        Side::exact(target),
        json!({
            "two_d": two_d, "k": k, "n": n, "N": big_ns, "sigma": sig, "budget": budget,
            "p_hat": ests.iter().map(|e| e.p_hat).collect::<Vec<_>>(), "slopes": slopes,
        }),
    )
    .with_seed(seed)
    .note("qualitative rate check; the absolute constant is not asserted"))
}

/// Configured summary of an LCD computation, for reports.
pub fn lcd_summary(r: &LcdResult) -> serde_json::Value {
    json!({
        "alpha": r.alpha, "low": r.bracket_low, "high": finite_or_null(r.bracket_high),
        "status": r.status.as_str(), "cells": r.certificate.points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::OrthoFrame;

    fn frame(rows: usize, k: usize, s: u64) -> RealMatrix {
        OrthoFrame::sample(rows, k, &mut SeedSpec::new(s, "frame").rng(0)).unwrap().matrix
    }

    #[test]
    fn augmented_layout() {
        let w = RealMatrix::from_fn(4, 1, |i, _| i as f64 + 1.0);
        let a = AugmentedMatrix::new(w, vec![7.0, 8.0]).unwrap().assemble();
        assert_eq!(a.rows(), 4);
        assert_eq!(a.cols(), 3);
        assert_eq!(a.column(0), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(a.column(1), vec![0.0, 0.0, 7.0, 8.0]);
        assert_eq!(a.column(2), vec![7.0, 8.0, 0.0, 0.0]);
        assert!(AugmentedMatrix::new(RealMatrix::zeros(3, 1), vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn inverse_lwo_all_ones() {
        let d = 16;
        let v = vec![0.25; d];
        let w = RealMatrix::zeros(0, d);
        let c = LwoConstants { r: 1.0, c1: 1.0, c2: 2.0 };
        let r = verify_inverse_lwo(&v, &w, 0.1, 0.3, c, 100_000, &SeedSpec::new(1, "lwo")).unwrap();
        // ⟨τ,v⟩ = S/4, so the event is |S| ≤ 1; D_α(v) ≤ 4 ≤ 16/t.
        assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
        let mut dist = vec![1.0f64];
        for _ in 0..d {
            let mut next = vec![0.0; dist.len() + 2];
            for (i, p) in dist.iter().enumerate() {
                next[i] += p / 8.0;
                next[i + 1] += 0.75 * p;
                next[i + 2] += p / 8.0;
            }
            dist = next;
        }
        let exact = dist[d - 1] + dist[d] + dist[d + 1];
        assert!(r.lhs.lo <= exact && exact <= r.lhs.hi, "{exact} {:?}", r.lhs);
    }

    #[test]
    fn inverse_lwo_generic_vector_is_vacuous() {
        let d = 16;
        let mut rng = SeedSpec::new(2, "g").rng(0);
        let g: Vec<f64> = (0..d).map(|_| crate::rng::standard_normal(&mut rng)).collect();
        let v = crate::numerics::matrix::unit(&g).unwrap();
        let w = frame(d, 1, 4).transpose();
        let c = LwoConstants { r: 1.0, c1: 1.0, c2: 0.5 };
        let r = verify_inverse_lwo(&v, &w, 0.2, 0.2, c, 50_000, &SeedSpec::new(2, "lwo")).unwrap();
        assert!(matches!(r.verdict, Verdict::Vacuous | Verdict::Holds), "{r:?}");
    }

    #[test]
    fn cond_walk_examples() {
        let consts = RegimeConstants { alpha: 0.004, ..RegimeConstants::lab() };
        let d = 8;
        let t = 0.005;
        // Y = v/t for a generic v, k = 2.
        let mut rng = SeedSpec::new(3, "y").rng(0);
        let g: Vec<f64> = (0..d).map(|_| crate::rng::standard_normal(&mut rng)).collect();
        let y: Vec<f64> = crate::numerics::matrix::unit(&g).unwrap().iter().map(|x| x / t).collect();
        let w = frame(2 * d, 2, 5);
        let r = verify_cond_walk_lcd(&y, &w, &consts, t, 100_000, &SeedSpec::new(3, "cw")).unwrap();
        assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
        assert!(r.notes.iter().any(|n| n == "lab-constants"));
        // k = 0 reduction.
        let w0 = RealMatrix::zeros(2 * d, 0);
        let r = verify_cond_walk_lcd(&y, &w0, &consts, t, 50_000, &SeedSpec::new(4, "cw")).unwrap();
        assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
        // Y with a small LCD witness: hypothesis fails.
        let y1 = vec![1.0; d];
        let r = verify_cond_walk_lcd(&y1, &w, &consts, 0.5, 10_000, &SeedSpec::new(5, "cw")).unwrap();
        assert_eq!(r.verdict, Verdict::Vacuous);
        // ‖Y‖ too small.
        let r = verify_cond_walk_lcd(&vec![1e-9; d], &w, &consts, 0.5, 10_000, &SeedSpec::new(5, "cw")).unwrap();
        assert_eq!(r.verdict, Verdict::PreconditionsUnmet);
    }

    #[test]
    fn hanson_wright_examples() {
        let w = frame(128, 64, 6);
        let r = verify_hanson_wright(&w, 0.25, 0.03, 20_000, &SeedSpec::new(6, "hw")).unwrap();
        assert_eq!(r.verdict, Verdict::Vacuous, "{r:?}");
        assert!(r.notes.iter().any(|n| n == "vacuous-scale"));
        assert_eq!(r.params["median_diagnostic"], "holds");
        let med = r.params["median"].as_f64().unwrap();
        assert!(med >= (0.125f64).sqrt() * 8.0);
        let r = verify_hanson_wright(&w, 0.25, 0.5, 1000, &SeedSpec::new(6, "hw")).unwrap();
        assert_eq!(r.verdict, Verdict::PreconditionsUnmet);
    }

    #[test]
    fn median_interval_brackets() {
        let s: Vec<f64> = (0..1001).map(|i| i as f64).collect();
        let (m, lo, hi) = median_interval(&s, 0.99);
        assert_eq!(m, 500.0);
        assert!(lo < 500.0 && hi > 500.0 && hi - lo < 100.0);
    }

    #[test]
    fn tensorization_examples() {
        // W = 0: LHS = 1 and the bound is at least 32^{n−d}.
        let r = verify_tensorization(&RealMatrix::zeros(8, 3), 0.25, 0.1, 12, 4, 5000, &SeedSpec::new(7, "t")).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert_eq!(r.lhs.hat, 1.0);
        let mut rng = SeedSpec::new(8, "w").rng(0);
        let w = RealMatrix::from_fn(8, 3, |_, _| if rng.next_u32() & 1 == 0 { 1.0 } else { -1.0 });
        let r = verify_tensorization(&w, 0.25, 0.1, 12, 4, 100_000, &SeedSpec::new(8, "t")).unwrap();
        assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
        // single-row reduction: LHS ≤ P(‖Wᵀτ‖ ≤ β²√(k+1)) directly
        let r1 = verify_tensorization(&w, 0.25, 0.1, 5, 4, 50_000, &SeedSpec::new(9, "t")).unwrap();
        let law = LazyLaw::new(0.25).unwrap();
        let direct = mc_probability(&SeedSpec::new(9, "t").child("lhs"), 50_000, || (vec![0i8; 8], vec![0.0; 3]), |rng, (tau, out)| {
            law.fill(rng, tau);
            lazy_dot_into(&w, tau, out);
            out.iter().map(|x| x * x).sum::<f64>() <= 0.01f64.powi(2) * 2.0 * (1.0 + 1e-12)
        });
        assert_eq!(r1.lhs.hat, direct.p_hat);
        assert_eq!(r1.verdict, Verdict::Holds);
    }

    #[test]
    fn rank_event_examples() {
        let spec = RankEventSpec::new(16, 4, 1, 0.25).unwrap();
        let x = vec![5.0, -6.0, 7.0, -4.5];
        let r = rank_event_mc(&spec, &x, 0.25, 20_000, &SeedSpec::new(10, "rk")).unwrap();
        assert_eq!(r.histogram.iter().sum::<u64>(), 20_000);
        // k = 0 reduces to the ball conditions alone.
        let s0 = RankEventSpec::new(16, 4, 0, 0.25).unwrap();
        let r0 = rank_event_mc(&s0, &x, 0.25, 20_000, &SeedSpec::new(10, "rk")).unwrap();
        assert!(r0.estimate.p_hat >= r.estimate.p_hat);
        // huge X-scale shrink: ball conditions always hold, event = σ condition
        let tiny = vec![1e-9; 4];
        let rt = rank_event_mc(&spec, &tiny, 0.25, 20_000, &SeedSpec::new(10, "rk")).unwrap();
        let sig_only: u64 = rt.histogram[1..].iter().sum();
        assert_eq!((rt.estimate.p_hat * 20_000.0).round() as u64, sig_only);
        let consts = RegimeConstants::lab();
        let rep = verify_rank_h(&spec, &x, 4.0, &consts, 50_000, &SeedSpec::new(11, "rk")).unwrap();
        assert!(matches!(rep.verdict, Verdict::Holds | Verdict::Vacuous), "{rep:?}");
    }

    #[test]
    fn rarity_guards_and_run() {
        let r = lcd_rarity_experiment(64, 64, 64.0, 2.0, 2f64.powi(-24), 0.25, 1000, &SeedSpec::new(12, "r")).unwrap();
        assert_eq!(r.verdict, Verdict::PreconditionsUnmet);
        let r = lcd_rarity_experiment(16, 16, 64.0, 2.0, 2f64.powi(-19), 0.25, 1000, &SeedSpec::new(12, "r")).unwrap();
        assert_eq!(r.verdict, Verdict::Vacuous);
        let alpha = rarity_alpha_for(32, 0.1);
        let r = lcd_rarity_experiment(32, 32, 64.0, 2.0, alpha, 0.25, 20_000, &SeedSpec::new(12, "r")).unwrap();
        assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
    }

    #[test]
    fn second_moment_examples() {
        let r = verify_second_moment(&[0.0; 12], 12, 3, 0.25, 5000, &SeedSpec::new(13, "s")).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert_eq!((r.lhs.hat, r.rhs.hat), (1.0, 1.0));
        let x: Vec<f64> = (0..12).map(|i| if i % 2 == 0 { 3.0 } else { -2.0 }).collect();
        let r = verify_second_moment(&x, 12, 3, 0.25, 100_000, &SeedSpec::new(13, "s")).unwrap();
        assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
        assert_eq!(r.params["inclusion_failures"], 0);
    }

    #[test]
    fn projection_decay_identity() {
        // ‖3X‖ ≤ 6 leaves the 89 lattice points of the radius-2 ball, so p(N) = 89/N⁴ once N ≥ 5.
        let h = RealMatrix::identity(4).scale(3.0);
        let r = verify_projection_decay(&h, 0, 0.25, 6, &[8, 16], 1_000_000, &SeedSpec::new(14, "p")).unwrap();
        assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
    }
}
