//! Concentration functions: ρ, ρ_ε, Lévy concentration and the threshold T_L.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, LabError, Result};
use crate::mc::{mc_collect, mc_probability};
use crate::numerics::matrix::{norm2, RealVec};
use crate::numerics::svd::op_norm;
use crate::rng::{LabRng, SeedSpec};
use crate::sample::{LazyLaw, SignSymMatrix, ZeroedMatrix};
use crate::stats::{clopper_pearson, Interval, McEstimate, Verdict, DEFAULT_CONFIDENCE};

pub const RHO_DIM_CAP: usize = 26;
pub const ATOM_TOL: f64 = 1e-9;

/// Atoms of the Rademacher walk Σ εᵢvᵢ as (value, multiplicity), sorted by value.
/// Sums closer than `atom_tol` to the first sum of their group are merged.
pub fn walk_atoms(v: &[f64], atom_tol: f64) -> Result<Vec<(f64, u64)>> {
    if v.len() > RHO_DIM_CAP {
        return Err(LabError::EnumerationCap { dim: v.len(), cap: RHO_DIM_CAP });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(LabError::NonFinite("walk coefficients"));
    }
    // Sorted sums by repeated merge of the two shifted copies.
    let mut sums = vec![0.0f64];
    for &c in v {
        let c = c.abs();
        let mut next = Vec::with_capacity(sums.len() * 2);
        let (mut i, mut j) = (0, 0);
        while i < sums.len() || j < sums.len() {
            let lo = sums.get(i).map(|s| s - c);
            let hi = sums.get(j).map(|s| s + c);
            match (lo, hi) {
                (Some(a), Some(b)) if a <= b => {
                    next.push(a);
                    i += 1;
                }
                (Some(_), Some(b)) | (None, Some(b)) => {
                    next.push(b);
                    j += 1;
                }
                (Some(a), None) => {
                    next.push(a);
                    i += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        sums = next;
    }
    let mut atoms: Vec<(f64, u64)> = Vec::new();
    let mut start = f64::NAN;
    for s in sums {
        match atoms.last_mut() {
            Some(last) if s - start <= atom_tol => last.1 += 1,
            _ => {
                atoms.push((s, 1));
                start = s;
            }
        }
    }
    Ok(atoms)
}

/// ρ(v) = max_b P(Σ εᵢvᵢ = b).
pub fn rho_exact(v: &[f64]) -> Result<f64> {
    rho_exact_tol(v, ATOM_TOL)
}

pub fn rho_exact_tol(v: &[f64], atom_tol: f64) -> Result<f64> {
    let atoms = walk_atoms(v, atom_tol)?;
    let total = 2f64.powi(v.len() as i32);
    Ok(atoms.iter().map(|a| a.1).max().unwrap_or(1) as f64 / total)
}

/// ρ_ε(v) = max_b P(Σ εᵢvᵢ ∈ (b−ε, b+ε)); ε = 0 gives the largest atom.
pub fn rho_eps_exact(v: &[f64], eps: f64) -> Result<f64> {
    ensure(eps >= 0.0, || format!("eps={eps} must be ≥ 0"))?;
    if eps == 0.0 {
        return rho_exact(v);
    }
    let atoms = walk_atoms(v, ATOM_TOL)?;
    let total = 2f64.powi(v.len() as i32);
    let (mut best, mut mass, mut j) = (0u64, 0u64, 0usize);
    for i in 0..atoms.len() {
        if j < i {
            j = i;
            mass = 0;
        }
        while j < atoms.len() && atoms[j].0 - atoms[i].0 < 2.0 * eps {
            mass += atoms[j].1;
            j += 1;
        }
        best = best.max(mass);
        mass -= atoms[i].1;
    }
    Ok(best as f64 / total)
}

/// Lévy concentration estimate together with the center that achieved it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyEstimate {
    pub estimate: McEstimate,
    pub center: RealVec,
    pub candidates: usize,
}

/// Center protocol shared by the Lévy estimators: candidates are `n_centers`
/// fresh samples plus the origin plus `extra`; ball masses come from an
/// independent second sample. `draw` fills the vector and returns whether the
/// sample is admissible (admissible failures never count toward any ball).
pub fn levy_mc_with<F>(
    dim: usize,
    draw: F,
    t: f64,
    extra: &[RealVec],
    n_centers: usize,
    budget: u64,
    seed: &SeedSpec,
) -> Result<LevyEstimate>
where
    F: Fn(&mut LabRng, &mut Vec<f64>) -> bool + Sync,
{
    ensure(t >= 0.0, || format!("radius t={t} must be ≥ 0"))?;
    ensure(budget >= 1000, || format!("budget {budget} below 10³"))?;
    let sampled: Vec<Option<RealVec>> = mc_collect(&seed.child("centers"), n_centers as u64, || (), |rng, _| {
        let mut x = vec![0.0; dim];
        draw(rng, &mut x).then_some(x)
    });
    let mut centers: Vec<RealVec> = vec![vec![0.0; dim]];
    centers.extend(extra.iter().cloned());
    centers.extend(sampled.into_iter().flatten());
    centers.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    centers.dedup();
    for c in &centers {
        if c.len() != dim {
            return Err(LabError::DimensionMismatch { expected: dim, got: c.len() });
        }
    }
    let t2 = t * t * (1.0 + 1e-12) + 1e-300;
    let k = centers.len();
    let counts = crate::mc::mc_fold(
        &seed.child("mass"),
        budget,
        || (vec![0u64; k], vec![0.0; dim]),
        |rng, (acc, x)| {
            if draw(rng, x) {
                for (c, a) in centers.iter().zip(acc.iter_mut()) {
                    let mut d2 = 0.0;
                    for (xi, ci) in x.iter().zip(c) {
                        d2 += (xi - ci) * (xi - ci);
                        if d2 > t2 {
                            break;
                        }
                    }
                    if d2 <= t2 {
                        *a += 1;
                    }
                }
            }
        },
        |a, b| a.0.iter_mut().zip(b.0).for_each(|(x, y)| *x += y),
    )
    .0;
    let (best, idx) = counts.iter().enumerate().map(|(i, &c)| (c, i)).max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1))).unwrap();
    // Bonferroni over the candidate set.
    let conf = 1.0 - (1.0 - DEFAULT_CONFIDENCE) / k as f64;
    let (lo, hi) = clopper_pearson(best, budget, conf);
    let estimate = McEstimate {
        p_hat: best as f64 / budget as f64,
        ci_low: lo,
        ci_high: hi,
        samples: budget,
        seed: Some(seed.clone()),
        method: crate::stats::Method::MonteCarlo,
        bias: crate::stats::Bias::LowerBound,
    };
    Ok(LevyEstimate { estimate, center: centers[idx].clone(), candidates: k })
}

pub const DEFAULT_CENTERS: usize = 256;

/// L(X, t) lower-bound estimate for a vector sampler.
pub fn levy_mc<F>(dim: usize, sampler: F, t: f64, extra: &[RealVec], budget: u64, seed: &SeedSpec) -> Result<LevyEstimate>
where
    F: Fn(&mut LabRng, &mut Vec<f64>) + Sync,
{
    levy_mc_with(
        dim,
        |r, x| {
            sampler(r, x);
            true
        },
        t,
        extra,
        DEFAULT_CENTERS,
        budget,
        seed,
    )
}

/// L_{A,op}(v, t): ball event for Av jointly with ‖A‖ ≤ 4√n.
pub fn levy_opnorm_mc(v: &[f64], t: f64, budget: u64, seed: &SeedSpec) -> Result<LevyEstimate> {
    ensure((norm2(v) - 1.0).abs() <= 1e-9, || "v must be a unit vector".into())?;
    levy_opnorm_any(v, t, budget, seed)
}

/// As [`levy_opnorm_mc`] without the unit-norm requirement (net points have ‖v‖ ≤ 2).
pub fn levy_opnorm_any(v: &[f64], t: f64, budget: u64, seed: &SeedSpec) -> Result<LevyEstimate> {
    let n = v.len();
    let cap = 4.0 * (n as f64).sqrt();
    // ‖A‖ ≤ ‖A‖_HS = n, so the cap is automatic when n ≤ 4√n.
    let needs_svd = n as f64 > cap;
    levy_mc_with(
        n,
        |rng, x| {
            let a = SignSymMatrix::sample(n, rng);
            let av = a.mul_vec(v);
            x.copy_from_slice(&av);
            !needs_svd || op_norm(&a.to_real()).map(|s| s <= cap).unwrap_or(false)
        },
        t,
        &[],
        DEFAULT_CENTERS,
        budget,
        seed,
    )
}

/// P(‖Mv‖₂ ≤ t√n) for M the zeroed matrix with an (n−d)×d μ-lazy block.
pub fn small_ball_mc(v: &[f64], t: f64, n: usize, d: usize, mu: f64, budget: u64, seed: &SeedSpec) -> Result<McEstimate> {
    ensure(t >= 0.0, || format!("t={t} must be ≥ 0"))?;
    ensure(v.len() == n, || format!("v has dimension {} ≠ n={n}", v.len()))?;
    ensure(d >= 1 && d < n, || format!("need 1 ≤ d < n, got d={d}"))?;
    let law = LazyLaw::new(mu)?;
    let r2 = t * t * n as f64 * (1.0 + 1e-12);
    Ok(mc_probability(
        seed,
        budget,
        || (ZeroedMatrix { n, d, mu, h1: vec![0; (n - d) * d] }, Vec::new()),
        |rng, (m, scratch)| {
            m.resample(&law, rng);
            m.apply_norm_sq(v, scratch) <= r2
        },
    ))
}

/// Samples of ‖Mv‖₂/√n, sorted ascending.
pub fn small_ball_samples(v: &[f64], n: usize, d: usize, mu: f64, budget: u64, seed: &SeedSpec) -> Result<Vec<f64>> {
    ensure(v.len() == n && d >= 1 && d < n, || "shape mismatch for small-ball samples".into())?;
    let law = LazyLaw::new(mu)?;
    let sn = (n as f64).sqrt();
    let mut s = mc_collect(
        seed,
        budget,
        || (ZeroedMatrix { n, d, mu, h1: vec![0; (n - d) * d] }, Vec::new()),
        |rng, (m, scratch)| {
            m.resample(&law, rng);
            m.apply_norm_sq(v, scratch).sqrt() / sn
        },
    );
    s.sort_by(f64::total_cmp);
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub t_low: f64,
    pub t_high: f64,
    pub big_l: f64,
    pub probe_estimates: Vec<(f64, McEstimate)>,
    /// Bracket narrowed to the requested resolution.
    pub resolved: bool,
    /// No grid probe was conclusive either way.
    pub flagged: bool,
}

pub const THRESHOLD_PROBES: usize = 64;

/// Analytic lower bound (1/(4L))·(1−μ)^{d(n−d)/n}, from P(M = 0).
pub fn threshold_floor(big_l: f64, n: usize, d: usize, mu: f64) -> f64 {
    (1.0 - mu).powf((d * (n - d)) as f64 / n as f64) / (4.0 * big_l)
}

/// Brackets T_L(v) = sup{t ∈ [0,1] : P(‖Mv‖₂ ≤ t√n) ≥ (4Lt)^n}.
#[allow(clippy::too_many_arguments)]
pub fn threshold_estimate(
    v: &[f64],
    big_l: f64,
    n: usize,
    d: usize,
    mu: f64,
    budget: u64,
    resolution: f64,
    seed: &SeedSpec,
) -> Result<ThresholdResult> {
    ensure((norm2(v) - 1.0).abs() <= 1e-9, || "v must be a unit vector".into())?;
    ensure(big_l >= 2.0, || format!("L={big_l} must be ≥ 2"))?;
    let samples = small_ball_samples(v, n, d, mu, budget, seed)?;
    let total = samples.len() as u64;
    let est = |t: f64| {
        let k = samples.partition_point(|&x| x <= t * (1.0 + 1e-12)) as u64;
        McEstimate::binomial(k, total, Some(seed.clone()), DEFAULT_CONFIDENCE)
    };
    let target = |t: f64| (4.0 * big_l * t).powi(n as i32);
    let floor = threshold_floor(big_l, n, d, mu);
    let top = 1.0 / (4.0 * big_l);

    let grid: Vec<f64> = (0..THRESHOLD_PROBES)
        .map(|i| floor * (top / floor).powf(i as f64 / (THRESHOLD_PROBES - 1) as f64))
        .collect();
    let probes: Vec<(f64, McEstimate)> = grid.iter().map(|&t| (t, est(t))).collect();
    let sat = |e: &McEstimate, t: f64| e.ci_low >= target(t);
    // Cell [a, b] is certified empty when P(≤ b) < (4La)^n: then P(t) ≤ P(b) < (4Lt)^n on it.
    let cell_empty = |a: f64, b_est: &McEstimate| b_est.ci_high < target(a);

    let mut t_low = floor;
    for (t, e) in &probes {
        if sat(e, *t) {
            t_low = t_low.max(*t);
        }
    }
    // Smallest grid point past which every cell up to `top` is certified empty.
    let mut t_high = top;
    let mut idx = probes.len() - 1;
    while idx > 0 {
        let (a, _) = probes[idx - 1];
        if a < t_low || !cell_empty(a, &probes[idx].1) {
            break;
        }
        t_high = a;
        idx -= 1;
    }
    let flagged = t_low == floor && t_high == top && !probes.iter().any(|(t, e)| sat(e, *t));

    // Refine by bisection while decisions stay conclusive.
    let mut probe_estimates = probes;
    let mut resolved = t_high - t_low <= resolution;
    let mut hi_est = est(t_high);
    while !resolved {
        let mid = 0.5 * (t_low + t_high);
        let e = est(mid);
        if sat(&e, mid) {
            t_low = mid;
        } else if cell_empty(mid, &hi_est) {
            t_high = mid;
            hi_est = e.clone();
        } else {
            probe_estimates.push((mid, e));
            break;
        }
        probe_estimates.push((mid, e));
        resolved = t_high - t_low <= resolution;
    }
    Ok(ThresholdResult { t_low, t_high, big_l, probe_estimates, resolved, flagged })
}

/// ρ_ε(v)⁴ ≤ 2¹²Lε at ε = T_L(v): certified when ρ_{t_high}⁴ ≤ 2¹²L·t_low
/// (monotonicity of ρ_ε brackets the unknown T).
pub fn verify_rho_v_tau(v: &[f64], th: &ThresholdResult) -> Result<(Verdict, f64, f64)> {
    let lhs_hi = rho_eps_exact(v, th.t_high)?.powi(4);
    let lhs_lo = rho_eps_exact(v, th.t_low)?.powi(4);
    let rhs_lo = 4096.0 * th.big_l * th.t_low;
    let rhs_hi = 4096.0 * th.big_l * th.t_high;
    let verdict = crate::stats::verdict_le(Interval::new(lhs_lo, lhs_hi), Interval::new(rhs_lo, rhs_hi));
    Ok((verdict, lhs_hi, rhs_lo))
}

/// Exact L(X, t) for a finite discrete law: the heaviest atom subset whose
/// minimal enclosing ball has radius ≤ t. Intended for ≤ 12 atoms.
pub fn levy_exact_discrete(atoms: &[RealVec], probs: &[f64], t: f64) -> Result<f64> {
    ensure(atoms.len() == probs.len() && !atoms.is_empty(), || "atoms and probabilities must match".into())?;
    ensure(atoms.len() <= 12, || "exact Lévy enumeration is capped at 12 atoms".into())?;
    let m = atoms.len();
    let mut best = 0.0f64;
    for mask in 1u32..(1 << m) {
        let mass: f64 = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| probs[i]).sum();
        if mass <= best {
            continue;
        }
        let pts: Vec<&RealVec> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| &atoms[i]).collect();
        if min_enclosing_radius(&pts) <= t * (1.0 + 1e-12) + 1e-12 {
            best = mass;
        }
    }
    Ok(best)
}

/// Radius of the minimal enclosing ball, by enumerating support sets.
pub fn min_enclosing_radius(pts: &[&RealVec]) -> f64 {
    let m = pts.len();
    if m <= 1 {
        return 0.0;
    }
    let dim = pts[0].len();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << m) {
        let sup: Vec<&RealVec> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| pts[i]).collect();
        if sup.len() > dim + 1 {
            continue;
        }
        let Some(c) = circumcenter(&sup) else { continue };
        let r = crate::numerics::matrix::norm2(&crate::numerics::matrix::sub(sup[0], &c));
        if r >= best {
            continue;
        }
        if pts.iter().all(|p| norm2(&crate::numerics::matrix::sub(p, &c)) <= r * (1.0 + 1e-10) + 1e-12) {
            best = r;
        }
    }
    best
}

/// Center of the smallest sphere through the points within their affine hull.
fn circumcenter(pts: &[&RealVec]) -> Option<RealVec> {
    let p0 = pts[0];
    let k = pts.len() - 1;
    if k == 0 {
        return Some(p0.clone());
    }
    let diffs: Vec<RealVec> = pts[1..].iter().map(|p| crate::numerics::matrix::sub(p, p0)).collect();
    let mut g = vec![vec![0.0; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            g[i][j] = crate::numerics::dot(&diffs[i], &diffs[j]);
        }
        g[i][k] = 0.5 * crate::numerics::dot(&diffs[i], &diffs[i]);
    }
    // Gaussian elimination with partial pivoting.
    let scale = g.iter().flat_map(|r| r.iter()).fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    for col in 0..k {
        let piv = (col..k).max_by(|&a, &b| g[a][col].abs().total_cmp(&g[b][col].abs()))?;
        if g[piv][col].abs() < 1e-12 * scale {
            return None;
        }
        g.swap(piv, col);
        for r in 0..k {
            if r != col {
                let f = g[r][col] / g[col][col];
                for c in col..=k {
                    g[r][c] -= f * g[col][c];
                }
            }
        }
    }
    let lam: Vec<f64> = (0..k).map(|i| g[i][k] / g[i][i]).collect();
    let mut c = p0.clone();
    for (l, dvec) in lam.iter().zip(&diffs) {
        c.iter_mut().zip(dvec).for_each(|(x, y)| *x += l * y);
    }
    Some(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn naive_rho(v: &[f64]) -> f64 {
        let n = v.len();
        let mut sums: Vec<f64> = (0..1u32 << n)
            .map(|m| (0..n).map(|i| if m >> i & 1 == 1 { v[i] } else { -v[i] }).sum())
            .collect();
        sums.sort_by(f64::total_cmp);
        let mut best = 0;
        for i in 0..sums.len() {
            let c = sums.iter().filter(|&&s| (s - sums[i]).abs() <= 1e-9).count();
            best = best.max(c);
        }
        best as f64 / (1u64 << n) as f64
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho_exact(&[1.0]).unwrap(), 0.5);
        assert_eq!(rho_exact(&[1.0; 4]).unwrap(), 0.375);
        assert_eq!(rho_exact(&[1.0; 10]).unwrap(), 0.24609375);
        assert!(matches!(rho_exact(&[1.0; 27]), Err(LabError::EnumerationCap { .. })));
        assert_eq!(rho_eps_exact(&[1.0], 3.0).unwrap(), 1.0);
        assert_eq!(rho_eps_exact(&[1.0; 4], 0.0).unwrap(), 0.375);
        assert_eq!(rho_eps_exact(&[1.0; 4], 1.5).unwrap(), 0.625);
        assert_eq!(rho_eps_exact(&[1.0; 4], 1.0).unwrap(), 0.375);
    }

    #[test]
    fn rho_matches_naive() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let n = rng.gen_range(1..=9);
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-3i32..=3) as f64).collect();
            assert_eq!(rho_exact(&v).unwrap(), naive_rho(&v));
        }
    }

    #[test]
    fn rho_eps_matches_window_sweep() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let n = rng.gen_range(1..=8);
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let eps = rng.gen_range(0.01..1.5);
            let sums: Vec<f64> = (0..1u32 << n).map(|m| (0..n).map(|i| if m >> i & 1 == 1 { v[i] } else { -v[i] }).sum()).collect();
            // best open window has a sum just inside its left end
            let best = sums
                .iter()
                .map(|&a| sums.iter().filter(|&&s| s >= a - 1e-12 && s < a + 2.0 * eps - 1e-12).count())
                .max()
                .unwrap();
            let got = rho_eps_exact(&v, eps).unwrap() * (1u64 << n) as f64;
            assert!((got - best as f64).abs() < 0.5, "{got} {best}");
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn rho_invariances(seed in 0u64..10_000, n in 1usize..=12) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-4i32..=4) as f64).collect();
            let r = rho_exact(&v).unwrap();
            let mut w: Vec<f64> = v.iter().map(|x| if rng.gen::<bool>() { -x * 3.0 } else { x * 3.0 }).collect();
            for i in (1..n).rev() { w.swap(i, rng.gen_range(0..=i)); }
            proptest::prop_assert_eq!(r, rho_exact(&w).unwrap());
            let e1 = rng.gen_range(0.1..1.0);
            let a = rho_eps_exact(&v, e1).unwrap();
            let b = rho_eps_exact(&v, e1 * 2.0).unwrap();
            proptest::prop_assert!(r <= a && a <= b);
        }
    }

    #[test]
    fn levy_examples() {
        let seed = SeedSpec::new(1, "levy");
        let e = levy_mc(2, |_, x| x.fill(0.0), 0.1, &[], 2000, &seed).unwrap();
        assert_eq!(e.estimate.p_hat, 1.0);
        let e = levy_mc(1, |r, x| x[0] = if r.gen::<bool>() { 1.0 } else { -1.0 }, 0.5, &[], 20_000, &seed).unwrap();
        assert!(e.estimate.ci_low <= 0.5 && 0.5 <= e.estimate.ci_high);
        let e = levy_mc(
            1,
            |r, x| x[0] = (0..4).map(|_| if r.gen::<bool>() { 1.0 } else { -1.0 }).sum(),
            0.5,
            &[],
            20_000,
            &seed,
        )
        .unwrap();
        assert!(e.estimate.ci_low <= 0.375 && 0.375 <= e.estimate.ci_high);
        assert_eq!(e.estimate.bias, crate::stats::Bias::LowerBound);
    }

    #[test]
    fn opnorm_levy_monotone() {
        let n = 9;
        let v = vec![1.0 / 3.0; n];
        let seed = SeedSpec::new(2, "op");
        let a = levy_opnorm_mc(&v, 1.0, 5000, &seed).unwrap();
        let b = levy_opnorm_mc(&v, 2.0, 5000, &seed).unwrap();
        assert!(a.estimate.p_hat <= b.estimate.p_hat);
        let z = levy_opnorm_mc(&v, 0.0, 5000, &seed).unwrap();
        assert!(z.estimate.p_hat <= 1.0);
        let big = levy_opnorm_mc(&v, 2.0 * n as f64, 5000, &seed).unwrap();
        assert_eq!(big.estimate.p_hat, 1.0);
    }

    #[test]
    fn small_ball_examples() {
        let (n, d, mu) = (8, 2, 0.25);
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        let e = small_ball_mc(&e1, 0.0, n, d, mu, 100_000, &SeedSpec::new(3, "sb")).unwrap();
        let truth = 0.75f64.powi((n - d) as i32);
        assert!(e.ci_low <= truth && truth <= e.ci_high);
        let e = small_ball_mc(&e1, 10.0, n, d, mu, 2000, &SeedSpec::new(3, "sb")).unwrap();
        assert_eq!(e.p_hat, 1.0);
    }

    fn binom_pmf(k: usize, n: usize, p: f64) -> f64 {
        let mut c = 1.0;
        for i in 0..k {
            c *= (n - i) as f64 / (i + 1) as f64;
        }
        c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
    }

    #[test]
    fn threshold_bracket_contains_exact_value_for_e1() {
        let (n, d, mu, l) = (8usize, 2usize, 0.25, 2.0);
        let mut v = vec![0.0; n];
        v[0] = 1.0;
        // ‖Mv‖² is Binomial(n−d, μ)
        let mut cdf = 0.0;
        let mut truth = 0.0f64;
        for j in 0..=(n - d) {
            cdf += binom_pmf(j, n - d, mu);
            let cand = cdf.powf(1.0 / n as f64) / (4.0 * l);
            if cand >= (j as f64 / n as f64).sqrt() {
                truth = truth.max(cand.min(((j + 1) as f64 / n as f64).sqrt()));
            }
        }
        let th = threshold_estimate(&v, l, n, d, mu, 200_000, 1e-4, &SeedSpec::new(4, "th")).unwrap();
        assert!(th.t_low <= truth && truth <= th.t_high, "{} {truth} {}", th.t_low, th.t_high);
        assert!(th.t_high <= 1.0 / (4.0 * l) + 1e-15);
        assert!(th.t_low >= threshold_floor(l, n, d, mu));
    }

    #[test]
    fn regularity_of_levy() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let dim = rng.gen_range(2..=4);
            let m = rng.gen_range(2..=7);
            let atoms: Vec<RealVec> = (0..m).map(|_| (0..dim).map(|_| rng.gen_range(-2i32..=2) as f64).collect()).collect();
            let w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..1.0)).collect();
            let s: f64 = w.iter().sum();
            let p: Vec<f64> = w.iter().map(|x| x / s).collect();
            let t = rng.gen_range(0.3..2.0);
            let r = t * rng.gen_range(1.0..3.0);
            let lt = levy_exact_discrete(&atoms, &p, t).unwrap();
            let lr = levy_exact_discrete(&atoms, &p, r).unwrap();
            assert!(lt <= lr + 1e-12);
            assert!(lr <= (1.0 + 2.0 * r / t).powi(dim) * lt + 1e-12);
        }
    }

    #[test]
    fn enclosing_ball() {
        let a = vec![0.0, 0.0];
        let b = vec![2.0, 0.0];
        let c = vec![1.0, 0.1];
        assert!((min_enclosing_radius(&[&a, &b, &c]) - 1.0).abs() < 1e-12);
        let d = vec![1.0, 3.0];
        let r = min_enclosing_radius(&[&a, &b, &d]);
        // circumradius of the acute triangle (0,0),(2,0),(1,3)
        assert!((r - 5.0 / 3.0).abs() < 1e-12);
    }
}
