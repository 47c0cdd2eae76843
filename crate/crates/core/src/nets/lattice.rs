//! Flat windows, the trivial lattice net Λ_ε and coordinatewise randomized rounding onto it.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, LabError, Result};
use crate::mc::mc_fold;
use crate::numerics::matrix::{norm2, RealVec};
use crate::rng::{uniform01, SeedSpec};
use crate::sample::{LazyLaw, ZeroedMatrix};
use crate::stats::{McEstimate, DEFAULT_CONFIDENCE};

/// Relative tolerance for reading a float coordinate back as a lattice integer.
pub const LATTICE_TOL: f64 = 1e-9;
const BOUND_SLACK: f64 = 1e-12;
/// Hard cap on enumerated lattice points.
pub const ENUM_CAP: usize = 5_000_000;

/// I(D) (strict, on the sphere) or I′(D) (loose, in Rⁿ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatWindowSpec {
    pub d_set: Vec<usize>,
    pub n: usize,
    pub kappa0: f64,
    pub kappa1: f64,
    pub strict: bool,
}

impl FlatWindowSpec {
    pub fn new(d_set: Vec<usize>, n: usize, kappa0: f64, kappa1: f64, strict: bool) -> Result<Self> {
        ensure(0.0 < kappa0 && kappa0 < 1.0 && 1.0 < kappa1, || format!("need 0 < κ₀ < 1 < κ₁, got {kappa0}, {kappa1}"))?;
        ensure(d_set.iter().all(|&i| i < n), || format!("index set {d_set:?} not inside [0, {n})"))?;
        let mut d_set = d_set;
        d_set.sort_unstable();
        d_set.dedup();
        Ok(Self { d_set, n, kappa0, kappa1, strict })
    }

    /// Window on the first `d` coordinates.
    pub fn leading(n: usize, d: usize, kappa0: f64, kappa1: f64, strict: bool) -> Result<Self> {
        ensure(d <= n, || format!("d={d} exceeds n={n}"))?;
        Self::new((0..d).collect(), n, kappa0, kappa1, strict)
    }

    pub fn d(&self) -> usize {
        self.d_set.len()
    }

    pub fn is_leading(&self) -> bool {
        self.d_set.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Bounds on |v_i|·√n for i ∈ D.
    pub fn scaled_bounds(&self) -> (f64, f64) {
        if self.strict {
            (1.5 * self.kappa0, self.kappa1 - self.kappa0 / 2.0)
        } else {
            (self.kappa0, self.kappa1)
        }
    }

    pub fn loose(&self) -> Self {
        Self { strict: false, ..self.clone() }
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        if v.len() != self.n {
            return false;
        }
        if self.strict && (norm2(v) - 1.0).abs() > 1e-9 {
            return false;
        }
        let (lo, hi) = self.scaled_bounds();
        let sn = (self.n as f64).sqrt();
        self.d_set.iter().all(|&i| {
            let a = v[i].abs() * sn;
            a >= lo * (1.0 - BOUND_SLACK) && a <= hi * (1.0 + BOUND_SLACK)
        })
    }
}

/// Λ_ε = B(0,2) ∩ 4εn^{−1/2}Zⁿ ∩ I′(D).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrivialNetSpec {
    pub n: usize,
    pub eps: f64,
    pub window: FlatWindowSpec,
}

impl TrivialNetSpec {
    pub fn new(n: usize, d: usize, eps: f64, kappa0: f64, kappa1: f64) -> Result<Self> {
        ensure(eps > 0.0 && eps.is_finite(), || format!("ε={eps} must be positive"))?;
        Ok(Self { n, eps, window: FlatWindowSpec::leading(n, d, kappa0, kappa1, false)? })
    }

    pub fn grid(&self) -> f64 {
        4.0 * self.eps / (self.n as f64).sqrt()
    }

    /// Σ X_i² bound for integer coordinates X = v/grid.
    pub fn ball_sq_bound(&self) -> f64 {
        self.n as f64 / (4.0 * self.eps * self.eps)
    }

    /// Integer range of |X_i| for i ∈ D.
    pub fn flat_range(&self) -> (i64, i64) {
        let s = 4.0 * self.eps;
        let lo = (self.window.kappa0 / s * (1.0 - BOUND_SLACK)).ceil() as i64;
        let hi = (self.window.kappa1 / s * (1.0 + BOUND_SLACK)).floor() as i64;
        (lo.max(0), hi)
    }

    pub fn integer_coords(&self, v: &[f64]) -> Option<Vec<i64>> {
        let g = self.grid();
        v.iter()
            .map(|&x| {
                let y = x / g;
                let r = y.round();
                ((y - r).abs() <= LATTICE_TOL * y.abs().max(1.0)).then_some(r as i64)
            })
            .collect()
    }

    pub fn from_int(&self, x: &[i64]) -> RealVec {
        let g = self.grid();
        x.iter().map(|&k| k as f64 * g).collect()
    }

    /// Membership for integer coordinates; exact up to the ball's float bound.
    pub fn contains_int(&self, x: &[i64]) -> bool {
        if x.len() != self.n {
            return false;
        }
        let sq: f64 = x.iter().map(|&k| (k as f64) * (k as f64)).sum();
        if sq > self.ball_sq_bound() * (1.0 + BOUND_SLACK) {
            return false;
        }
        let (lo, hi) = self.flat_range();
        self.window.d_set.iter().all(|&i| (lo..=hi).contains(&x[i].abs()))
    }

    /// All integer points of Λ_ε in lexicographic order.
    pub fn enumerate(&self, cap: usize) -> Result<Vec<Vec<i64>>> {
        let mut flat = vec![false; self.n];
        for &i in &self.window.d_set {
            flat[i] = true;
        }
        let (flo, fhi) = self.flat_range();
        let budget = self.ball_sq_bound() * (1.0 + BOUND_SLACK);
        let mut out = Vec::new();
        let mut cur = vec![0i64; self.n];
        // Cheapest completion of the remaining coordinates: flat ones need at least flo².
        let mut tail_min = vec![0.0f64; self.n + 1];
        for i in (0..self.n).rev() {
            tail_min[i] = tail_min[i + 1] + if flat[i] { (flo * flo) as f64 } else { 0.0 };
        }
        if flo > fhi && !self.window.d_set.is_empty() {
            return Ok(out);
        }
        fn rec(
            i: usize,
            used: f64,
            cur: &mut Vec<i64>,
            ctx: (&[bool], i64, i64, f64, &[f64], usize),
            out: &mut Vec<Vec<i64>>,
        ) -> Result<()> {
            let (flat, flo, fhi, budget, tail_min, cap) = ctx;
            if i == cur.len() {
                if out.len() >= cap {
                    return Err(LabError::EnumerationCap { dim: cur.len(), cap });
                }
                out.push(cur.clone());
                return Ok(());
            }
            let room = budget - used - tail_min[i + 1];
            if room < 0.0 {
                return Ok(());
            }
            let r = room.sqrt().floor() as i64;
            for x in -r..=r {
                let a = x.abs();
                if flat[i] && !(flo..=fhi).contains(&a) {
                    continue;
                }
                let u = used + (x * x) as f64;
                if u + tail_min[i + 1] > budget {
                    continue;
                }
                cur[i] = x;
                rec(i + 1, u, cur, ctx, out)?;
            }
            cur[i] = 0;
            Ok(())
        }
        rec(0, 0.0, &mut cur, (&flat, flo, fhi, budget, &tail_min, cap), &mut out)?;
        Ok(out)
    }

    /// A random point of Λ_ε: flat coordinates uniform on their range, the rest by
    /// sequential rejection from the cube (uniform over Λ_ε).
    pub fn sample_point(&self, rng: &mut impl RngCore) -> Option<Vec<i64>> {
        let (flo, fhi) = self.flat_range();
        if flo > fhi && !self.window.d_set.is_empty() {
            return None;
        }
        let budget = self.ball_sq_bound() * (1.0 + BOUND_SLACK);
        let r = budget.sqrt().floor() as i64;
        let mut flat = vec![false; self.n];
        for &i in &self.window.d_set {
            flat[i] = true;
        }
        let pick = |rng: &mut dyn RngCore, m: u64| ((rng.next_u64() as u128 * m as u128) >> 64) as u64;
        loop {
            let mut x = vec![0i64; self.n];
            let mut used = 0.0;
            let mut ok = true;
            for i in 0..self.n {
                x[i] = if flat[i] {
                    let m = (fhi - flo + 1) as u64;
                    let a = flo + pick(rng, m) as i64;
                    if pick(rng, 2) == 0 { a } else { -a }
                } else {
                    pick(rng, (2 * r + 1) as u64) as i64 - r
                };
                used += (x[i] * x[i]) as f64;
                if used > budget {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Some(x);
            }
        }
    }
}

pub fn lambda_membership(v: &[f64], spec: &TrivialNetSpec) -> bool {
    if v.len() != spec.n || norm2(v) > 2.0 * (1.0 + BOUND_SLACK) {
        return false;
    }
    spec.integer_coords(v).is_some_and(|x| spec.contains_int(&x)) && spec.window.contains(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorRounding {
    pub u: RealVec,
    /// u = grid · x.
    pub x: Vec<i64>,
    /// ‖u − v‖_∞.
    pub r_inf: f64,
    pub bound: f64,
}

/// Per-coordinate rounding: (floor, probability of rounding up) of v_i/grid.
fn rounding_plan(v: &[f64], g: f64) -> Vec<(i64, f64)> {
    v.iter()
        .map(|&vi| {
            let y = vi / g;
            let r = y.round();
            if (y - r).abs() <= LATTICE_TOL * y.abs().max(1.0) {
                (r as i64, 0.0)
            } else {
                let f = y.floor();
                (f as i64, y - f)
            }
        })
        .collect()
}

/// u = v − r with independent mean-zero r_i and u ∈ 4εn^{−1/2}Zⁿ.
pub fn round_vector_to_net(v: &[f64], spec: &TrivialNetSpec, seed: &SeedSpec) -> Result<VectorRounding> {
    let strict = FlatWindowSpec { strict: true, ..spec.window.clone() };
    ensure(spec.eps > 0.0 && spec.eps < spec.window.kappa0 / 8.0, || {
        format!("need 0 < ε < κ₀/8 = {}, got {}", spec.window.kappa0 / 8.0, spec.eps)
    })?;
    ensure(strict.contains(v), || "v must be a unit vector in I(D)".into())?;
    let g = spec.grid();
    let mut rng = seed.rng(0);
    let x: Vec<i64> = rounding_plan(v, g)
        .into_iter()
        .map(|(f, p)| if p > 0.0 && uniform01(&mut rng) < p { f + 1 } else { f })
        .collect();
    let u = spec.from_int(&x);
    let r_inf = u.iter().zip(v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(VectorRounding { u, x, r_inf, bound: g })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovStepReport {
    /// E‖Mr‖₂² over M and the rounding noise r.
    pub mean: McEstimate,
    /// Closed form μ Σ_i Var(r_i)·#(block entries in row i).
    pub exact_mean: f64,
    /// ε²n.
    pub bound: f64,
    /// P(‖Mr‖₂ ≥ 2ε√n); Markov gives ≤ 1/4.
    pub tail: McEstimate,
}

/// Monte Carlo check of E‖Mr‖₂² ≤ ε²n for the rounding noise of v.
pub fn markov_step_mc(v: &[f64], spec: &TrivialNetSpec, mu: f64, budget: u64, seed: &SeedSpec) -> Result<MarkovStepReport> {
    let n = spec.n;
    let d = spec.window.d();
    ensure(v.len() == n, || format!("v has dimension {} ≠ {n}", v.len()))?;
    ensure(spec.window.is_leading() && d >= 1 && d < n, || "Markov step needs D = [d] with 1 ≤ d < n".into())?;
    let law = LazyLaw::new(mu)?;
    let g = spec.grid();
    let plan = rounding_plan(v, g);
    let exact_mean: f64 = plan
        .iter()
        .enumerate()
        .map(|(i, &(_, p))| g * g * p * (1.0 - p) * mu * if i < d { (n - d) as f64 } else { d as f64 })
        .sum();
    let range = g * g * ((d * (n - d) * (n - d)) as f64 + ((n - d) * d * d) as f64);
    let tail_r2 = 4.0 * spec.eps * spec.eps * n as f64;
    let (s, s2, hits, ..) = mc_fold(
        seed,
        budget,
        || (0.0f64, 0.0f64, 0u64, ZeroedMatrix { n, d, mu, h1: vec![0; (n - d) * d] }, vec![0.0; n], Vec::new()),
        |rng, acc| {
            acc.3.resample(&law, rng);
            for (ri, &(_, p)) in acc.4.iter_mut().zip(&plan) {
                // r = v − u: −(1−p)g when rounding up, +p·g when rounding down.
                *ri = if p > 0.0 && uniform01(rng) < p { -(1.0 - p) * g } else { p * g };
            }
            let q = acc.3.apply_norm_sq(&acc.4, &mut acc.5);
            acc.0 += q;
            acc.1 += q * q;
            if q >= tail_r2 {
                acc.2 += 1;
            }
        },
        |a, b| {
            a.0 += b.0;
            a.1 += b.1;
            a.2 += b.2;
        },
    );
    let mean = McEstimate::bounded_mean(s, s2, budget, range, Some(seed.clone()), DEFAULT_CONFIDENCE);
    let tail = McEstimate::binomial(hits, budget, Some(seed.clone()), DEFAULT_CONFIDENCE);
    Ok(MarkovStepReport { mean, exact_mean, bound: spec.eps * spec.eps * n as f64, tail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedSpec;

    fn spec(n: usize, d: usize, eps: f64) -> TrivialNetSpec {
        TrivialNetSpec::new(n, d, eps, 0.5, 2.0).unwrap()
    }

    /// Flat unit vector in I([d]): coordinates of size 1/√n.
    fn flat_unit(n: usize, seed: u64) -> RealVec {
        let mut rng = SeedSpec::new(seed, "flat").rng(0);
        let v: RealVec = (0..n).map(|_| if rng.next_u32() & 1 == 0 { 1.0 } else { -1.0 } * (0.9 + 0.2 * uniform01(&mut rng))).collect();
        let s = norm2(&v);
        v.iter().map(|x| x / s).collect()
    }

    #[test]
    fn windows() {
        let w = FlatWindowSpec::leading(4, 2, 0.5, 2.0, false).unwrap();
        assert!(!w.contains(&[0.0; 4]));
        assert!(w.contains(&[0.25, -1.0, 0.0, 9.0]));
        assert!(!w.contains(&[0.2, -1.0, 0.0, 9.0]));
        let s = FlatWindowSpec { strict: true, ..w };
        assert!(s.contains(&[0.5; 4]));
        assert!(!s.contains(&[0.25, 0.25, 0.0, 0.0]));
    }

    #[test]
    fn lambda_examples() {
        let sp = spec(4, 2, 0.25);
        assert!(!lambda_membership(&[0.0; 4], &sp));
        // grid = 0.5, so X = (1, −2, 0, 4) gives v = (0.5, −1, 0, 2)
        let v = sp.from_int(&[1, -2, 0, 4]);
        assert!(!lambda_membership(&v, &sp), "norm {} > 2", norm2(&v));
        let v = sp.from_int(&[1, -2, 0, 1]);
        assert!(lambda_membership(&v, &sp));
        let mut off = v.clone();
        off[2] += 1e-6;
        assert!(!lambda_membership(&off, &sp));
    }

    #[test]
    fn enumeration_matches_cube_scan() {
        let sp = spec(6, 2, 0.4);
        let pts = sp.enumerate(ENUM_CAP).unwrap();
        let r = sp.ball_sq_bound().sqrt().ceil() as i64;
        let mut count = 0usize;
        let side = (2 * r + 1) as usize;
        let mut x = vec![0i64; 6];
        for code in 0..side.pow(6) {
            let mut c = code;
            for xi in x.iter_mut() {
                *xi = (c % side) as i64 - r;
                c /= side;
            }
            if lambda_membership(&sp.from_int(&x), &sp) {
                count += 1;
            }
        }
        assert!(count > 0);
        assert_eq!(pts.len(), count);
        assert!(pts.iter().all(|p| sp.contains_int(p) && lambda_membership(&sp.from_int(p), &sp)));
    }

    #[test]
    fn enumeration_cap() {
        let sp = spec(8, 2, 0.1);
        assert!(matches!(sp.enumerate(100), Err(LabError::EnumerationCap { .. })));
    }

    #[test]
    fn sampled_points_are_members() {
        let sp = spec(12, 2, 0.0625);
        let mut rng = SeedSpec::new(3, "pts").rng(0);
        for _ in 0..200 {
            let x = sp.sample_point(&mut rng).unwrap();
            assert!(lambda_membership(&sp.from_int(&x), &sp));
        }
    }

    #[test]
    fn rounding_on_lattice_is_identity() {
        // n = 16, ε = 1/40: grid = ε and v_i = 1/4 = 10·grid.
        let sp = spec(16, 2, 1.0 / 40.0);
        let v = vec![0.25; 16];
        let out = round_vector_to_net(&v, &sp, &SeedSpec::new(1, "r")).unwrap();
        assert_eq!(out.r_inf, 0.0);
        assert_eq!(out.x, vec![10; 16]);
    }

    #[test]
    fn rounding_bounds_and_unbiased() {
        let n = 12;
        let sp = spec(n, 2, 0.05);
        let v = flat_unit(n, 9);
        let mut mean = vec![0.0; n];
        let trials = 10_000;
        for t in 0..trials {
            let out = round_vector_to_net(&v, &sp, &SeedSpec::new(t, "r")).unwrap();
            assert!(out.r_inf <= out.bound);
            assert!(lambda_membership(&out.u, &sp));
            assert!(sp.window.contains(&out.u));
            mean.iter_mut().zip(&out.u).for_each(|(m, u)| *m += u / trials as f64);
        }
        let g = sp.grid();
        for (m, vi) in mean.iter().zip(&v) {
            // sd of one rounding ≤ g/2
            assert!((m - vi).abs() <= 4.0 * 0.5 * g / (trials as f64).sqrt(), "{m} vs {vi}");
        }
    }

    #[test]
    fn rounding_preconditions() {
        let sp = spec(12, 2, 0.07);
        assert!(round_vector_to_net(&flat_unit(12, 1), &sp, &SeedSpec::new(0, "r")).is_err());
        let sp = spec(12, 2, 0.05);
        let mut v = vec![0.0; 12];
        v[5] = 1.0;
        assert!(round_vector_to_net(&v, &sp, &SeedSpec::new(0, "r")).is_err());
    }

    #[test]
    fn markov_step_matches_closed_form() {
        let n = 64;
        let sp = spec(n, 2, 0.05);
        let v = flat_unit(n, 4);
        let r = markov_step_mc(&v, &sp, 0.25, 200_000, &SeedSpec::new(5, "mk")).unwrap();
        assert!(r.mean.ci_low <= r.exact_mean && r.exact_mean <= r.mean.ci_high, "{:?} {}", r.mean, r.exact_mean);
        assert!(r.mean.ci_high <= r.bound);
        assert!(r.tail.ci_high <= 0.25);
    }
}
