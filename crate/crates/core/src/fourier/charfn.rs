//! Characteristic functions of the lazy walk Wᵀτ, of Av and of Mv.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, LabError, Result};
use crate::numerics::matrix::RealMatrix;
use crate::numerics::torus::dist_to_int;
use crate::rng::SeedSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CharFnSpec {
    /// φ(θ) = E exp(2πi⟨τ, Wθ⟩) for τ ∼ Q(rows, μ).
    LazyWalk { w: RealMatrix, mu: f64 },
    /// ψ_v(ξ) for the symmetric ±1 matrix A.
    SymMatrix { v: Vec<f64> },
    /// χ_v(ξ) for the zeroed matrix M with lazy block on [d+1,n]×[d].
    Zeroed { v: Vec<f64>, d: usize, mu: f64 },
}

impl CharFnSpec {
    pub fn point_dim(&self) -> usize {
        match self {
            CharFnSpec::LazyWalk { w, .. } => w.cols(),
            CharFnSpec::SymMatrix { v } | CharFnSpec::Zeroed { v, .. } => v.len(),
        }
    }
}

/// 1 − μ + μcos(2πx), written as 1 − 2μ sin²(πx) to keep precision near 0.
pub fn lazy_factor(mu: f64, x: f64) -> f64 {
    let s = (PI * x).sin();
    1.0 - 2.0 * mu * s * s
}

/// −log(1 − μ + μcos(2πx)).
pub fn neg_log_lazy_factor(mu: f64, x: f64) -> f64 {
    let s = (PI * x).sin();
    -(-2.0 * mu * s * s).ln_1p()
}

pub fn char_fn_eval(spec: &CharFnSpec, point: &[f64]) -> Result<f64> {
    if point.len() != spec.point_dim() {
        return Err(LabError::DimensionMismatch { expected: spec.point_dim(), got: point.len() });
    }
    Ok(match spec {
        CharFnSpec::LazyWalk { w, mu } => w.mul_vec(point)?.iter().map(|&x| lazy_factor(*mu, x)).product(),
        CharFnSpec::SymMatrix { v } => {
            let n = v.len();
            let mut p = 1.0;
            for k in 0..n {
                p *= (2.0 * PI * v[k] * point[k]).cos();
                for j in 0..k {
                    p *= (2.0 * PI * (point[j] * v[k] + point[k] * v[j])).cos();
                }
            }
            p
        }
        CharFnSpec::Zeroed { v, d, mu } => {
            ensure(*d >= 1 && *d < v.len(), || format!("need 1 ≤ d < n, got d={d}"))?;
            let mut p = 1.0;
            for j in 0..*d {
                for k in *d..v.len() {
                    p *= lazy_factor(*mu, point[j] * v[k] + point[k] * v[j]);
                }
            }
            p
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub points: usize,
    pub violations: usize,
    /// Smallest slack seen (negative means a violation beyond tolerance).
    pub worst_margin: f64,
}

impl SweepReport {
    pub(crate) fn new() -> Self {
        Self { points: 0, violations: 0, worst_margin: f64::INFINITY }
    }

    pub(crate) fn record(&mut self, margin: f64, tol: f64) {
        self.points += 1;
        self.worst_margin = self.worst_margin.min(margin);
        if margin < -tol {
            self.violations += 1;
        }
    }

    pub fn holds(&self) -> bool {
        self.violations == 0 && self.points > 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosPhiReport {
    pub mu: f64,
    pub scalar_lower: SweepReport,
    pub scalar_upper: SweepReport,
    pub matrix_lower: SweepReport,
    pub matrix_upper: SweepReport,
    /// φ > 0 on every evaluated point.
    pub positive: bool,
}

impl CosPhiReport {
    pub fn holds(&self) -> bool {
        self.scalar_lower.holds() && self.scalar_upper.holds() && self.matrix_lower.holds() && self.matrix_upper.holds() && self.positive
    }
}

pub const SWEEP_TOL: f64 = 1e-12;

/// μ‖x‖_T² ≤ −log(1−μ+μcos 2πx) ≤ 32μ‖x‖_T² on `grid` points of [−2, 2], and
/// exp(−32μ‖Wθ‖_T²) ≤ φ(θ) ≤ exp(−μ‖Wθ‖_T²) on `grid` random (W, θ).
pub fn verify_cos_phi_bounds(mu: f64, grid: usize, seed: &SeedSpec) -> Result<CosPhiReport> {
    ensure((0.0..=0.25).contains(&mu), || format!("μ={mu} must lie in [0, 1/4]"))?;
    ensure(grid >= 2, || "grid needs at least two points".into())?;
    let mut lo = SweepReport::new();
    let mut hi = SweepReport::new();
    for i in 0..grid {
        let x = -2.0 + 4.0 * i as f64 / (grid - 1) as f64;
        let t2 = dist_to_int(x).powi(2);
        let mid = neg_log_lazy_factor(mu, x);
        lo.record(mid - mu * t2, SWEEP_TOL);
        hi.record(32.0 * mu * t2 - mid, SWEEP_TOL);
    }
    let mut mlo = SweepReport::new();
    let mut mhi = SweepReport::new();
    let mut positive = true;
    let mut rng = seed.rng(0);
    for _ in 0..grid {
        let rows = rng.gen_range(1..=8);
        let ell = rng.gen_range(1..=3);
        let scale = rng.gen_range(0.1..3.0);
        let w = RealMatrix::from_fn(rows, ell, |_, _| rng.gen_range(-1.0..1.0) * scale);
        let theta: Vec<f64> = (0..ell).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let wt = w.mul_vec(&theta)?;
        let t2: f64 = wt.iter().map(|&x| dist_to_int(x).powi(2)).sum();
        let log_phi: f64 = -wt.iter().map(|&x| neg_log_lazy_factor(mu, x)).sum::<f64>();
        let phi = char_fn_eval(&CharFnSpec::LazyWalk { w, mu }, &theta)?;
        positive &= phi > 0.0;
        // compare in log space where the sandwich is exact term by term
        mlo.record(log_phi + 32.0 * mu * t2, SWEEP_TOL);
        mhi.record(-mu * t2 - log_phi, SWEEP_TOL);
    }
    Ok(CosPhiReport { mu, scalar_lower: lo, scalar_upper: hi, matrix_lower: mlo, matrix_upper: mhi, positive })
}

/// ψ_v(ξ) ≤ χ_v(2ξ) at μ = 1/4 over `trials` random (v, ξ, d) with n ≤ `max_n`.
pub fn verify_fourier_comparison(trials: usize, max_n: usize, seed: &SeedSpec) -> Result<SweepReport> {
    ensure(max_n >= 2, || "need n ≥ 2".into())?;
    let mut rep = SweepReport::new();
    let mut rng = seed.rng(0);
    for _ in 0..trials {
        let n = rng.gen_range(2..=max_n);
        let d = rng.gen_range(1..n);
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let xi: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let xi2: Vec<f64> = xi.iter().map(|x| 2.0 * x).collect();
        let psi = char_fn_eval(&CharFnSpec::SymMatrix { v: v.clone() }, &xi)?;
        let chi = char_fn_eval(&CharFnSpec::Zeroed { v, d, mu: 0.25 }, &xi2)?;
        rep.record(chi - psi, SWEEP_TOL);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let w = RealMatrix::identity(1);
        let spec = CharFnSpec::LazyWalk { w, mu: 0.25 };
        assert!((char_fn_eval(&spec, &[0.5]).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(char_fn_eval(&spec, &[0.0]).unwrap(), 1.0);
        let v = vec![0.3, -0.5, 0.8];
        assert_eq!(char_fn_eval(&CharFnSpec::SymMatrix { v: v.clone() }, &[0.0; 3]).unwrap(), 1.0);
        assert_eq!(char_fn_eval(&CharFnSpec::Zeroed { v, d: 1, mu: 0.25 }, &[0.0; 3]).unwrap(), 1.0);
        assert!(char_fn_eval(&spec, &[0.0, 1.0]).is_err());
        assert!((neg_log_lazy_factor(0.25, 0.5) - 2f64.ln()).abs() < 1e-15);
    }

    /// ψ_v by enumerating all symmetric sign matrices.
    #[test]
    fn sym_matrix_charfn_matches_enumeration() {
        let v = vec![0.31, -0.72, 0.55];
        let xi = vec![0.4, 1.1, -0.35];
        let n = 3;
        let m = n * (n + 1) / 2;
        let mut acc = 0.0;
        for code in 0..(1u64 << m) {
            let a = crate::sample::SignSymMatrix::from_code(n, code);
            let av = a.mul_vec(&v);
            acc += (2.0 * PI * crate::numerics::dot(&av, &xi)).cos();
        }
        acc /= (1u64 << m) as f64;
        let psi = char_fn_eval(&CharFnSpec::SymMatrix { v }, &xi).unwrap();
        assert!((acc - psi).abs() < 1e-12, "{acc} {psi}");
    }

    #[test]
    fn zeroed_charfn_matches_enumeration() {
        let (n, d) = (3usize, 1usize);
        let v = vec![0.4, -0.3, 0.9];
        let xi = vec![0.7, -0.2, 0.45];
        let mut acc = 0.0;
        // H₁ is 2×1 with entries in {−1,0,1}
        for a in -1i32..=1 {
            for b in -1i32..=1 {
                let p = |e: i32| if e == 0 { 0.75 } else { 0.125 };
                let h = [a as f64, b as f64];
                // Mv = (H₁ᵀ v_[2,3], H₁ v_1)
                let mv = [h[0] * v[1] + h[1] * v[2], h[0] * v[0], h[1] * v[0]];
                acc += p(a) * p(b) * (2.0 * PI * crate::numerics::dot(&mv, &xi)).cos();
            }
        }
        let chi = char_fn_eval(&CharFnSpec::Zeroed { v, d, mu: 0.25 }, &xi).unwrap();
        assert!((acc - chi).abs() < 1e-12);
        let _ = n;
    }

    #[test]
    fn sweeps_hold() {
        for mu in [0.05, 0.25] {
            let r = verify_cos_phi_bounds(mu, 10_000, &SeedSpec::new(1, "cos")).unwrap();
            assert!(r.holds(), "{r:?}");
        }
        let r = verify_fourier_comparison(10_000, 8, &SeedSpec::new(2, "cmp")).unwrap();
        assert!(r.holds(), "{r:?}");
    }
}
