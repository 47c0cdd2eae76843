//! Samplers for the random objects of the lab.

use rand::RngCore;

use crate::error::{ensure, LabError, Result};
use crate::numerics::matrix::{dot, RealMatrix, RealVec};
use crate::numerics::exact::{is_singular_i64, rank_i64};
use crate::rng::{standard_normal, LabRng, SeedSpec};

/// Thresholds for one μ-lazy entry drawn from a single 64-bit word:
/// P(−1) = P(+1) = a/2⁶⁴ with a = round(μ·2⁶³).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LazyLaw {
    mu: f64,
    a: u128,
}

impl LazyLaw {
    pub fn new(mu: f64) -> Result<Self> {
        ensure(mu > 0.0 && mu <= 1.0, || format!("laziness mu={mu} outside (0,1]"))?;
        let a = (mu * 2f64.powi(63)).round() as u128;
        Ok(Self { mu, a })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    #[inline]
    pub fn draw(&self, rng: &mut impl RngCore) -> i8 {
        let x = rng.next_u64() as u128;
        if x < self.a {
            -1
        } else if x < 2 * self.a {
            1
        } else {
            0
        }
    }

    pub fn fill(&self, rng: &mut impl RngCore, out: &mut [i8]) {
        for o in out {
            *o = self.draw(rng);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LazyVector {
    pub entries: Vec<i8>,
    pub mu: f64,
}

impl LazyVector {
    pub fn as_f64(&self) -> RealVec {
        self.entries.iter().map(|&x| x as f64).collect()
    }
}

pub fn sample_lazy_vector(m: usize, mu: f64, seed: &SeedSpec) -> Result<LazyVector> {
    let law = LazyLaw::new(mu)?;
    let mut rng = seed.rng(0);
    let mut entries = vec![0i8; m];
    law.fill(&mut rng, &mut entries);
    Ok(LazyVector { entries, mu })
}

/// Fills with independent uniform signs, 64 per word.
pub fn fill_signs(rng: &mut impl RngCore, out: &mut [i8]) {
    for chunk in out.chunks_mut(64) {
        let mut bits = rng.next_u64();
        for o in chunk {
            *o = if bits & 1 == 1 { 1 } else { -1 };
            bits >>= 1;
        }
    }
}

/// Symmetric n×n matrix with independent uniform ±1 entries on and above the diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignSymMatrix {
    n: usize,
    entries: Vec<i8>,
}

impl SignSymMatrix {
    pub fn sample(n: usize, rng: &mut impl RngCore) -> Self {
        let mut upper = vec![0i8; n * (n + 1) / 2];
        fill_signs(rng, &mut upper);
        Self::from_upper(n, &upper).expect("upper triangle has the right length")
    }

    /// Builds from the row-major upper triangle (diagonal included).
    pub fn from_upper(n: usize, upper: &[i8]) -> Result<Self> {
        if upper.len() != n * (n + 1) / 2 {
            return Err(LabError::DimensionMismatch { expected: n * (n + 1) / 2, got: upper.len() });
        }
        ensure(upper.iter().all(|x| x.abs() == 1), || "entries must be ±1".into())?;
        let mut entries = vec![0i8; n * n];
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                entries[i * n + j] = upper[k];
                entries[j * n + i] = upper[k];
                k += 1;
            }
        }
        Ok(Self { n, entries })
    }

    /// All 2^{n(n+1)/2} matrices, indexed by the bits of `code`.
    pub fn from_code(n: usize, code: u64) -> Self {
        let m = n * (n + 1) / 2;
        let upper: Vec<i8> = (0..m).map(|b| if (code >> b) & 1 == 1 { 1 } else { -1 }).collect();
        Self::from_upper(n, &upper).expect("valid code")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.n + j]
    }

    pub fn to_i64(&self) -> Vec<i64> {
        self.entries.iter().map(|&x| x as i64).collect()
    }

    pub fn to_real(&self) -> RealMatrix {
        RealMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j) as f64)
    }

    /// Bottom-right m×m principal block (drops the first n−m rows and columns).
    pub fn trailing_minor(&self, m: usize) -> Vec<i64> {
        let off = self.n - m;
        let mut out = Vec::with_capacity(m * m);
        for i in off..self.n {
            for j in off..self.n {
                out.push(self.get(i, j) as i64);
            }
        }
        out
    }

    pub fn is_singular(&self) -> bool {
        is_singular_i64(self.n, &self.to_i64())
    }

    pub fn trailing_rank(&self, m: usize) -> usize {
        if m == 0 {
            return 0;
        }
        rank_i64(m, m, &self.trailing_minor(m))
    }

    pub fn mul_vec(&self, v: &[f64]) -> RealVec {
        (0..self.n)
            .map(|i| self.entries[i * self.n..(i + 1) * self.n].iter().zip(v).map(|(&a, b)| a as f64 * b).sum())
            .collect()
    }
}

pub fn sample_sign_sym(n: usize, seed: &SeedSpec) -> Result<SignSymMatrix> {
    ensure(n >= 1, || "n must be at least 1".into())?;
    Ok(SignSymMatrix::sample(n, &mut seed.rng(0)))
}

/// M = [[0, H₁ᵀ], [H₁, 0]] with H₁ an (n−d)×d μ-lazy block.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroedMatrix {
    pub n: usize,
    pub d: usize,
    pub mu: f64,
    /// Row-major (n−d)×d.
    pub h1: Vec<i8>,
}

impl ZeroedMatrix {
    pub fn sample(n: usize, d: usize, law: &LazyLaw, rng: &mut impl RngCore) -> Self {
        let mut h1 = vec![0i8; (n - d) * d];
        law.fill(rng, &mut h1);
        Self { n, d, mu: law.mu(), h1 }
    }

    /// Fresh entries in place, reusing the allocation.
    pub fn resample(&mut self, law: &LazyLaw, rng: &mut impl RngCore) {
        law.fill(rng, &mut self.h1);
    }

    pub fn h1_entry(&self, i: usize, j: usize) -> i8 {
        self.h1[i * self.d + j]
    }

    /// M v = (H₁ᵀ v_{[d+1,n]}, H₁ v_{[d]}).
    pub fn apply(&self, v: &[f64]) -> RealVec {
        let (n, d) = (self.n, self.d);
        let mut out = vec![0.0; n];
        for i in 0..n - d {
            let row = &self.h1[i * d..(i + 1) * d];
            let mut s = 0.0;
            for (j, &h) in row.iter().enumerate() {
                if h != 0 {
                    let hf = h as f64;
                    s += hf * v[j];
                    out[j] += hf * v[d + i];
                }
            }
            out[d + i] = s;
        }
        out
    }

    /// ‖Mv‖₂² without allocating.
    pub fn apply_norm_sq(&self, v: &[f64], scratch: &mut Vec<f64>) -> f64 {
        let (n, d) = (self.n, self.d);
        scratch.clear();
        scratch.resize(d, 0.0);
        let mut lower = 0.0;
        for i in 0..n - d {
            let row = &self.h1[i * d..(i + 1) * d];
            let mut s = 0.0;
            let vi = v[d + i];
            for (j, &h) in row.iter().enumerate() {
                if h != 0 {
                    let hf = h as f64;
                    s += hf * v[j];
                    scratch[j] += hf * vi;
                }
            }
            lower += s * s;
        }
        lower + scratch.iter().map(|x| x * x).sum::<f64>()
    }

    pub fn assemble(&self) -> RealMatrix {
        let (n, d) = (self.n, self.d);
        RealMatrix::from_fn(n, n, |i, j| {
            if i < d && j >= d {
                self.h1_entry(j - d, i) as f64
            } else if i >= d && j < d {
                self.h1_entry(i - d, j) as f64
            } else {
                0.0
            }
        })
    }

    pub fn h1_matrix(&self) -> RealMatrix {
        RealMatrix::from_fn(self.n - self.d, self.d, |i, j| self.h1_entry(i, j) as f64)
    }
}

pub fn sample_zeroed_matrix(n: usize, d: usize, mu: f64, seed: &SeedSpec) -> Result<ZeroedMatrix> {
    ensure(d >= 1 && d < n, || format!("need 1 ≤ d < n, got d={d}, n={n}"))?;
    let law = LazyLaw::new(mu)?;
    Ok(ZeroedMatrix::sample(n, d, &law, &mut seed.rng(0)))
}

/// A (N, κ, d)-box: the first `d_flat` coordinates range over N ≤ |x| ≤ κN.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatBox {
    pub d_flat: usize,
    pub scale: i64,
    pub kappa: f64,
    pub sets: Vec<Vec<i64>>,
}

impl FlatBox {
    /// Flat coordinates as above; the remaining `n − d_flat` use the given sets.
    pub fn new(d_flat: usize, scale: i64, kappa: f64, tail: Vec<Vec<i64>>) -> Result<Self> {
        ensure(scale >= 2, || format!("box scale N={scale} must be ≥ 2"))?;
        ensure(kappa >= 2.0, || format!("box kappa={kappa} must be ≥ 2"))?;
        let hi = (kappa * scale as f64).floor() as i64;
        let flat: Vec<i64> = (-hi..=-scale).chain(scale..=hi).collect();
        let mut sets = vec![flat; d_flat];
        for (i, s) in tail.into_iter().enumerate() {
            ensure(s.len() as i64 >= scale, || format!("coordinate {} has {} < N values", d_flat + i, s.len()))?;
            sets.push(s);
        }
        ensure(!sets.is_empty(), || "box must have at least one coordinate".into())?;
        Ok(Self { d_flat, scale, kappa, sets })
    }

    /// Box in dimension n whose non-flat coordinates range over [−κN, κN].
    pub fn symmetric(n: usize, d_flat: usize, scale: i64, kappa: f64) -> Result<Self> {
        let hi = (kappa * scale as f64).floor() as i64;
        Self::new(d_flat, scale, kappa, vec![(-hi..=hi).collect(); n - d_flat])
    }

    pub fn dim(&self) -> usize {
        self.sets.len()
    }

    pub fn sample(&self, rng: &mut impl RngCore) -> RealVec {
        self.sets
            .iter()
            .map(|s| {
                let k = ((rng.next_u64() as u128 * s.len() as u128) >> 64) as usize;
                s[k] as f64
            })
            .collect()
    }

    pub fn log_cardinality(&self) -> f64 {
        self.sets.iter().map(|s| (s.len() as f64).ln()).sum()
    }
}

pub fn sample_box_uniform(b: &FlatBox, seed: &SeedSpec) -> RealVec {
    b.sample(&mut seed.rng(0))
}

/// 2d × k matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoFrame {
    pub matrix: RealMatrix,
}

impl OrthoFrame {
    pub fn sample(rows: usize, k: usize, rng: &mut LabRng) -> Result<Self> {
        ensure(k <= rows, || format!("frame needs k={k} ≤ rows={rows}"))?;
        loop {
            let mut cols: Vec<Vec<f64>> = (0..k).map(|_| (0..rows).map(|_| standard_normal(rng)).collect()).collect();
            if orthonormalize(&mut cols) {
                return Ok(Self { matrix: RealMatrix::from_fn(rows, k, |i, j| cols[j][i]) });
            }
        }
    }
}

/// Modified Gram–Schmidt with one re-orthogonalization pass. False if a column collapses.
pub fn orthonormalize(cols: &mut [Vec<f64>]) -> bool {
    for j in 0..cols.len() {
        let (done, rest) = cols.split_at_mut(j);
        let c = &mut rest[0];
        let orig = dot(c, c).sqrt();
        for _ in 0..2 {
            for q in done.iter() {
                let a = dot(c, q);
                c.iter_mut().zip(q).for_each(|(x, y)| *x -= a * y);
            }
        }
        let nrm = dot(c, c).sqrt();
        if !(nrm > 1e-10 * orig.max(1e-300)) {
            return false;
        }
        c.iter_mut().for_each(|x| *x /= nrm);
    }
    true
}

pub fn sample_ortho_frame(two_d: usize, k: usize, seed: &SeedSpec) -> Result<OrthoFrame> {
    OrthoFrame::sample(two_d, k, &mut seed.rng(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::exact::{exact_det, IntMatrix};

    fn seed(label: &str) -> SeedSpec {
        SeedSpec::new(2024, label)
    }

    #[test]
    fn sign_sym_basics() {
        let a = sample_sign_sym(1, &seed("one")).unwrap();
        assert_eq!(a.get(0, 0).abs(), 1);
        let x = sample_sign_sym(3, &seed("three")).unwrap();
        assert_eq!(x, sample_sign_sym(3, &seed("three")).unwrap());
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(x.get(i, j), x.get(j, i));
            }
        }
        let mut rng = seed("freq").rng(0);
        let hits = (0..100_000).filter(|_| SignSymMatrix::sample(2, &mut rng).get(0, 1) == 1).count();
        assert!((hits as f64 / 1e5 - 0.5).abs() < 0.01);
        assert!(sample_sign_sym(0, &seed("zero")).is_err());
    }

    #[test]
    fn singular_flag_matches_det() {
        let mut rng = seed("sing").rng(0);
        for _ in 0..300 {
            let a = SignSymMatrix::sample(5, &mut rng);
            let det = exact_det(&IntMatrix::from_i64(5, 5, &a.to_i64()).unwrap()).unwrap();
            assert_eq!(a.is_singular(), det == 0.into());
        }
    }

    #[test]
    fn lazy_law() {
        let v = sample_lazy_vector(100, 1.0, &seed("mu1")).unwrap();
        assert!(v.entries.iter().all(|x| x.abs() == 1));
        assert!(sample_lazy_vector(0, 0.3, &seed("empty")).unwrap().entries.is_empty());
        assert!(sample_lazy_vector(3, 0.0, &seed("bad")).is_err());
        assert!(sample_lazy_vector(3, 1.5, &seed("bad")).is_err());

        let v = sample_lazy_vector(100_000, 0.25, &seed("q")).unwrap();
        let counts = [-1i8, 0, 1].map(|s| v.entries.iter().filter(|&&x| x == s).count() as f64);
        assert!((counts[1] / 1e5 - 0.75).abs() < 0.01);
        // χ² with 2 degrees of freedom, 99.9% quantile 13.8
        let expected = [12_500.0, 75_000.0, 12_500.0];
        let chi2: f64 = counts.iter().zip(expected).map(|(o, e)| (o - e) * (o - e) / e).sum();
        assert!(chi2 < 13.8, "{chi2}");
    }

    #[test]
    fn zeroed_matrix_structure() {
        let law = LazyLaw::new(0.25).unwrap();
        let mut rng = seed("zm").rng(0);
        let mut zeros = 0usize;
        let mut total = 0usize;
        for _ in 0..10_000 {
            let m = ZeroedMatrix::sample(6, 2, &law, &mut rng);
            zeros += m.h1.iter().filter(|&&x| x == 0).count();
            total += m.h1.len();
        }
        assert!((zeros as f64 / total as f64 - 0.75).abs() < 0.02);

        let m = sample_zeroed_matrix(7, 3, 0.5, &seed("asm")).unwrap();
        let full = m.assemble();
        assert_eq!(full, full.transpose());
        for i in 0..7 {
            for j in 0..7 {
                if (i < 3) == (j < 3) {
                    assert_eq!(full[(i, j)], 0.0);
                }
            }
        }
        let v: Vec<f64> = (0..7).map(|i| (i as f64 * 0.7).sin()).collect();
        let direct = full.mul_vec(&v).unwrap();
        let fast = m.apply(&v);
        assert!(direct.iter().zip(&fast).all(|(a, b)| (a - b).abs() < 1e-12));
        let h1 = m.h1_matrix();
        let top = h1.mul_vec(&v[..3]).unwrap();
        let bottom = h1.tmul_vec(&v[3..]).unwrap();
        let block = dot(&top, &top) + dot(&bottom, &bottom);
        let mut scratch = Vec::new();
        assert!((m.apply_norm_sq(&v, &mut scratch) - block).abs() < 1e-12);
        assert!(sample_zeroed_matrix(4, 4, 0.25, &seed("x")).is_err());
    }

    #[test]
    fn boxes() {
        assert!(FlatBox::new(1, 2, 1.0, vec![]).is_err());
        let b = FlatBox::new(1, 2, 2.0, vec![]).unwrap();
        assert_eq!(b.sets[0], vec![-4, -3, -2, 2, 3, 4]);
        let mut rng = seed("box").rng(0);
        let mut counts = std::collections::BTreeMap::new();
        for _ in 0..100_000 {
            *counts.entry(b.sample(&mut rng)[0] as i64).or_insert(0usize) += 1;
        }
        for (_, c) in counts {
            assert!((c as f64 / 1e5 - 1.0 / 6.0).abs() < 0.01);
        }
        assert_eq!(sample_box_uniform(&b, &seed("r")), sample_box_uniform(&b, &seed("r")));
    }

    #[test]
    fn ortho_frames() {
        let f = sample_ortho_frame(6, 6, &seed("sq")).unwrap();
        let det = exact_det_real(&f.matrix);
        assert!((det.abs() - 1.0).abs() < 1e-9);
        for s in 0..100 {
            let f = sample_ortho_frame(8, 3, &SeedSpec::new(s, "frame")).unwrap();
            let g = f.matrix.transpose().matmul(&f.matrix).unwrap();
            assert!(g.max_abs_diff(&RealMatrix::identity(3)) < 1e-10);
        }
        assert!(sample_ortho_frame(2, 3, &seed("bad")).is_err());
    }

    fn exact_det_real(m: &RealMatrix) -> f64 {
        crate::numerics::svd(m).unwrap().singular_values.iter().product()
    }
}
