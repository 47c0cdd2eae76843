//! Randomized rounding of an orthonormal frame onto the (δ/(8√d))Z grid (basis-net).

use serde::{Deserialize, Serialize};

use crate::error::{ensure, LabError, Result};
use crate::numerics::matrix::{dot, RealMatrix};
use crate::numerics::svd::op_norm;
use crate::rng::{uniform01, SeedSpec};
use crate::sample::OrthoFrame;

const ORTHO_TOL: f64 = 1e-9;

/// The three deviations controlled by basis-net.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deviations {
    /// ‖A(W−U)‖_HS
    pub a_hs: f64,
    /// ‖W−U‖_HS
    pub hs: f64,
    /// ‖W−U‖
    pub op: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundingReport {
    pub w: RealMatrix,
    /// W = step · grid, row-major.
    pub grid: Vec<i64>,
    pub step: f64,
    pub deviations: Deviations,
    /// δ(k/2d)^{1/2}‖A‖_HS, δ√k and 8δ.
    pub bounds: Deviations,
    pub w_hs: f64,
    /// Number of roundings drawn, including the accepted one.
    pub attempts: usize,
}

impl RoundingReport {
    pub fn satisfies(&self) -> bool {
        let (d, b) = (self.deviations, self.bounds);
        d.a_hs <= b.a_hs && d.hs <= b.hs && d.op <= b.op
    }
}

pub fn round_frame_to_net(u: &OrthoFrame, a: &RealMatrix, delta: f64, seed: &SeedSpec, retry_cap: usize) -> Result<RoundingReport> {
    let m = &u.matrix;
    let (rows, k) = (m.rows(), m.cols());
    ensure(delta > 0.0 && delta < 0.5, || format!("δ={delta} outside (0, 1/2)"))?;
    ensure(rows % 2 == 0 && rows > 0, || format!("frame has {rows} rows; need 2d"))?;
    let d = rows / 2;
    ensure(k <= d, || format!("need k={k} ≤ d={d}"))?;
    if a.cols() != rows {
        return Err(LabError::DimensionMismatch { expected: rows, got: a.cols() });
    }
    let cols: Vec<Vec<f64>> = (0..k).map(|j| m.column(j)).collect();
    for i in 0..k {
        for j in 0..=i {
            let target = if i == j { 1.0 } else { 0.0 };
            ensure((dot(&cols[i], &cols[j]) - target).abs() <= ORTHO_TOL, || "frame columns are not orthonormal".into())?;
        }
    }
    let step = delta / (8.0 * (d as f64).sqrt());
    let kf = k as f64;
    let bounds = Deviations { a_hs: delta * (kf / (2.0 * d as f64)).sqrt() * a.hs_norm(), hs: delta * kf.sqrt(), op: 8.0 * delta };
    let plan: Vec<(i64, f64)> = m
        .data()
        .iter()
        .map(|&x| {
            let y = x / step;
            let r = y.round();
            if (y - r).abs() <= 1e-9 * y.abs().max(1.0) {
                (r as i64, 0.0)
            } else {
                (y.floor() as i64, y - y.floor())
            }
        })
        .collect();
    for attempt in 0..retry_cap {
        let mut rng = seed.rng(attempt as u64);
        let grid: Vec<i64> = plan.iter().map(|&(f, p)| if p > 0.0 && uniform01(&mut rng) < p { f + 1 } else { f }).collect();
        let w = RealMatrix::from_vec(rows, k, grid.iter().map(|&g| g as f64 * step).collect())?;
        let diff = w.sub(m)?;
        let deviations = Deviations { a_hs: a.matmul(&diff)?.hs_norm(), hs: diff.hs_norm(), op: op_norm(&diff)? };
        let report = RoundingReport { w_hs: w.hs_norm(), w, grid, step, deviations, bounds, attempts: attempt + 1 };
        if report.satisfies() {
            return Ok(report);
        }
    }
    Err(LabError::RetryCap(retry_cap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::standard_normal;

    #[test]
    fn grid_aligned_frame_is_fixed() {
        let d = 4;
        let u = OrthoFrame { matrix: RealMatrix::from_fn(2 * d, 1, |i, _| if i == 0 { 1.0 } else { 0.0 }) };
        let a = RealMatrix::identity(2 * d);
        // δ = 1/4: step 1/64, so e₁ is on the grid
        let r = round_frame_to_net(&u, &a, 0.25, &SeedSpec::new(0, "bn"), 4).unwrap();
        assert_eq!(r.attempts, 1);
        assert_eq!(r.deviations, Deviations { a_hs: 0.0, hs: 0.0, op: 0.0 });
        assert_eq!(r.grid[0], 64);
    }

    #[test]
    fn random_frames_satisfy_all_properties() {
        let (d, k, delta) = (8, 3, 0.25);
        let mut total = 0;
        for t in 0..100u64 {
            let s = SeedSpec::new(t, "bn-case");
            let mut rng = s.rng(0);
            let u = OrthoFrame::sample(2 * d, k, &mut rng).unwrap();
            let rows = 1 + (t as usize % 20);
            let a = RealMatrix::from_fn(rows, 2 * d, |_, _| standard_normal(&mut rng));
            let r = round_frame_to_net(&u, &a, delta, &s.child("round"), 64).unwrap();
            assert!(r.satisfies());
            assert!(r.w_hs <= 2.0 * (k as f64).sqrt());
            for (g, w) in r.grid.iter().zip(r.w.data()) {
                assert_eq!(*g as f64 * r.step, *w);
            }
            total += r.attempts;
        }
        assert!(total as f64 / 100.0 <= 4.0);
    }

    #[test]
    fn preconditions() {
        let mut rng = SeedSpec::new(1, "p").rng(0);
        let u = OrthoFrame::sample(8, 3, &mut rng).unwrap();
        let a = RealMatrix::identity(8);
        assert!(round_frame_to_net(&u, &a, 0.5, &SeedSpec::new(0, "x"), 4).is_err());
        assert!(round_frame_to_net(&u, &RealMatrix::identity(6), 0.25, &SeedSpec::new(0, "x"), 4).is_err());
        let u5 = OrthoFrame::sample(8, 5, &mut rng).unwrap();
        assert!(round_frame_to_net(&u5, &a, 0.25, &SeedSpec::new(0, "x"), 4).is_err());
        assert_eq!(round_frame_to_net(&u, &a, 0.25, &SeedSpec::new(0, "x"), 0), Err(LabError::RetryCap(0)));
    }
}
