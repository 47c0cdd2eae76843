//! One-sided Jacobi SVD.

use super::matrix::{dot, RealMatrix};
use crate::error::{LabError, Result};

pub const MAX_SWEEPS: usize = 60;
pub const ROTATION_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct SvdResult {
    /// Nonincreasing, length `min(rows, cols)`.
    pub singular_values: Vec<f64>,
    /// `rows × min` with orthonormal columns.
    pub u: RealMatrix,
    /// `cols × min` with orthonormal columns.
    pub v: RealMatrix,
    pub tolerance: f64,
    pub sweeps: usize,
}

impl SvdResult {
    /// σ_j with 1-based `j`; zero past the last computed value.
    pub fn sigma(&self, j: usize) -> f64 {
        assert!(j >= 1, "singular values are 1-indexed");
        self.singular_values.get(j - 1).copied().unwrap_or(0.0)
    }

    pub fn op_norm(&self) -> f64 {
        self.sigma(1)
    }

    /// U Σ Vᵀ.
    pub fn reconstruct(&self) -> RealMatrix {
        let k = self.singular_values.len();
        RealMatrix::from_fn(self.u.rows(), self.v.rows(), |i, j| {
            (0..k).map(|l| self.u[(i, l)] * self.singular_values[l] * self.v[(j, l)]).sum()
        })
    }
}

pub fn svd(h: &RealMatrix) -> Result<SvdResult> {
    if h.data().iter().any(|x| !x.is_finite()) {
        return Err(LabError::NonFinite("svd input"));
    }
    if h.rows() < h.cols() {
        let t = svd_tall(&h.transpose())?;
        return Ok(SvdResult { u: t.v, v: t.u, ..t });
    }
    svd_tall(h)
}

/// Operator norm σ₁.
pub fn op_norm(h: &RealMatrix) -> Result<f64> {
    Ok(svd(h)?.op_norm())
}

fn svd_tall(h: &RealMatrix) -> Result<SvdResult> {
    let (m, n) = (h.rows(), h.cols());
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| h.column(j)).collect();
    let mut vcols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();

    // Columns below this norm are numerically null and never rotated.
    let floor = f64::EPSILON * h.hs_norm();
    let floor_sq = floor * floor;
    let mut sweeps = 0;
    let mut converged = n < 2;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(LabError::SvdNoConvergence { sweeps });
        }
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                let scale = (alpha * beta).sqrt();
                if gamma == 0.0 || alpha.min(beta) <= floor_sq || gamma.abs() <= ROTATION_TOL * scale {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut vcols, p, q, c, s);
            }
        }
        converged = !rotated;
    }

    let mut order: Vec<(f64, usize)> = cols.iter().enumerate().map(|(j, c)| (dot(c, c).sqrt(), j)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let sigma_max = order.first().map_or(0.0, |x| x.0);
    let cutoff = sigma_max * f64::EPSILON * (m.max(n) as f64);

    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut singular_values = Vec::with_capacity(n);
    let mut pending = Vec::new();
    for (slot, &(s, j)) in order.iter().enumerate() {
        singular_values.push(s);
        if s > cutoff && s > 0.0 {
            u_cols.push(cols[j].iter().map(|x| x / s).collect());
        } else {
            u_cols.push(vec![0.0; m]);
            pending.push(slot);
        }
    }
    // Complete the left factor for numerically null directions.
    let mut basis = 0;
    for slot in pending {
        loop {
            let mut e = vec![0.0; m];
            e[basis % m] = 1.0;
            basis += 1;
            for _ in 0..2 {
                for (k, uk) in u_cols.iter().enumerate() {
                    if k == slot {
                        continue;
                    }
                    let a = dot(&e, uk);
                    e.iter_mut().zip(uk).for_each(|(x, y)| *x -= a * y);
                }
            }
            let nrm = dot(&e, &e).sqrt();
            if nrm > 1e-8 {
                u_cols[slot] = e.into_iter().map(|x| x / nrm).collect();
                break;
            }
            if basis > 2 * m {
                break;
            }
        }
    }

    let u = RealMatrix::from_fn(m, n, |i, k| u_cols[k][i]);
    let v = RealMatrix::from_fn(n, n, |i, k| vcols[order[k].1][i]);
    Ok(SvdResult { singular_values, u, v, tolerance: 1e-9, sweeps })
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (a, b) = cols.split_at_mut(q);
    let (cp, cq) = (&mut a[p], &mut b[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};

    fn orthonormal_cols(m: &RealMatrix, tol: f64) -> bool {
        let g = m.transpose().matmul(m).unwrap();
        g.max_abs_diff(&RealMatrix::identity(m.cols())) < tol
    }

    #[test]
    fn identity_and_diag() {
        let s = svd(&RealMatrix::identity(3)).unwrap();
        assert_eq!(s.singular_values, vec![1.0, 1.0, 1.0]);
        let d = RealMatrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 3.0, 0.0], vec![0.0, 0.0, 2.0]]).unwrap();
        let s = svd(&d).unwrap();
        assert_eq!(s.singular_values, vec![3.0, 2.0, 1.0]);
        assert_eq!(s.sigma(4), 0.0);
    }

    #[test]
    fn sign_matrix_matches_eigen_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let h = RealMatrix::from_fn(6, 4, |_, _| if rng.gen::<bool>() { 1.0 } else { -1.0 });
            let s = svd(&h).unwrap();
            let hm = DMatrix::from_row_slice(6, 4, h.data());
            let mut eig: Vec<f64> = (hm.transpose() * &hm).symmetric_eigenvalues().iter().copied().collect();
            eig.sort_by(|a, b| b.total_cmp(a));
            for (sv, ev) in s.singular_values.iter().zip(&eig) {
                assert!((sv * sv - ev.max(0.0)).abs() < 1e-9, "{sv} {ev}");
            }
        }
    }

    #[test]
    fn rank_deficient_and_wide() {
        let h = RealMatrix::from_rows(&[vec![1.0, 1.0, 1.0], vec![1.0, 1.0, 1.0]]).unwrap();
        let s = svd(&h).unwrap();
        assert!((s.sigma(1) - 6f64.sqrt()).abs() < 1e-12);
        assert!(s.sigma(2).abs() < 1e-12);
        assert!(orthonormal_cols(&s.u, 1e-10));
        assert!(orthonormal_cols(&s.v, 1e-10));
        assert!(s.reconstruct().max_abs_diff(&h) < 1e-12);

        let z = RealMatrix::zeros(4, 3);
        let s = svd(&z).unwrap();
        assert!(s.singular_values.iter().all(|&x| x == 0.0));
        assert!(orthonormal_cols(&s.u, 1e-10));
    }

    #[test]
    fn rejects_nonfinite() {
        let mut h = RealMatrix::identity(2);
        h[(0, 1)] = f64::NAN;
        assert!(matches!(svd(&h), Err(LabError::NonFinite(_))));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn invariants(rows in 1usize..9, cols in 1usize..9, seed in 0u64..1000) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let h = RealMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-3.0..3.0));
            let s = svd(&h).unwrap();
            proptest::prop_assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
            let ss: f64 = s.singular_values.iter().map(|x| x * x).sum();
            let hs = h.hs_norm().powi(2);
            proptest::prop_assert!((ss - hs).abs() <= 1e-9 * hs.max(1.0));
            let err = s.reconstruct().sub(&h).unwrap().hs_norm();
            proptest::prop_assert!(err <= s.tolerance * h.hs_norm().max(1e-300));
            proptest::prop_assert!(orthonormal_cols(&s.u, 1e-9));
            proptest::prop_assert!(orthonormal_cols(&s.v, 1e-9));
        }
    }
}
