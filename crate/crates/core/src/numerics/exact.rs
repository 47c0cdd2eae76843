//! Exact integer linear algebra.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{LabError, Result};

/// Dense row-major matrix of arbitrary-precision integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn from_i64(rows: usize, cols: usize, data: &[i64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LabError::DimensionMismatch { expected: rows * cols, got: data.len() });
        }
        Ok(Self { rows, cols, data: data.iter().map(|&x| BigInt::from(x)).collect() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(BigInt::from(f(i, j)));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        Self { rows: self.cols, cols: self.rows, data }
    }

    /// Entries as `i64` if they all fit.
    fn to_i64(&self) -> Option<Vec<i64>> {
        self.data.iter().map(|x| i64::try_from(x).ok()).collect()
    }

    fn rows_vec(&self) -> Vec<Vec<BigInt>> {
        self.data.chunks(self.cols.max(1)).take(self.rows).map(|r| r.to_vec()).collect()
    }
}

/// Bareiss fraction-free determinant.
pub fn exact_det(a: &IntMatrix) -> Result<BigInt> {
    if a.rows != a.cols {
        return Err(LabError::DimensionMismatch { expected: a.rows, got: a.cols });
    }
    let n = a.rows;
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut m = a.rows_vec();
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    negate = !negate;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        let (top, bottom) = m.split_at_mut(k + 1);
        let pivot_row = &top[k];
        let pivot = &pivot_row[k];
        for row in bottom.iter_mut() {
            for j in k + 1..n {
                let v = &row[j] * pivot - &row[k] * &pivot_row[j];
                row[j] = v / &prev;
            }
            row[k] = BigInt::zero();
        }
        prev = pivot.clone();
    }
    let d = m[n - 1][n - 1].clone();
    Ok(if negate { -d } else { d })
}

/// Rank over ℚ by fraction-free elimination.
pub fn bareiss_rank(a: &IntMatrix) -> usize {
    let mut m = a.rows_vec();
    let (rows, cols) = (a.rows, a.cols);
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(p, r);
        let (top, bottom) = m.split_at_mut(r + 1);
        let pivot_row = &top[r];
        let pivot = &pivot_row[c];
        for row in bottom.iter_mut() {
            for j in c + 1..cols {
                let v = &row[j] * pivot - &row[c] * &pivot_row[j];
                row[j] = v / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = pivot.clone();
        r += 1;
    }
    r
}

/// Exact rank over ℚ. The single-prime elimination is trusted when it finds full
/// rank, or when Hadamard's bound keeps every minor below half the modulus;
/// Bareiss decides the rest.
pub fn exact_rank(a: &IntMatrix) -> usize {
    match a.to_i64() {
        Some(vals) => rank_i64(a.rows, a.cols, &vals),
        None => bareiss_rank(a),
    }
}

/// Exact singularity decision for a square integer matrix.
pub fn is_singular(a: &IntMatrix) -> Result<bool> {
    if a.rows != a.cols {
        return Err(LabError::DimensionMismatch { expected: a.rows, got: a.cols });
    }
    Ok(exact_rank(a) < a.rows)
}

/// Singularity of a square `i64` matrix; same exactness guarantee as `exact_rank`.
pub fn is_singular_i64(n: usize, vals: &[i64]) -> bool {
    rank_i64(n, n, vals) < n
}

/// Exact rank of an `i64` matrix.
pub fn rank_i64(rows: usize, cols: usize, vals: &[i64]) -> usize {
    // rank mod p never exceeds the rank over ℚ, so a full modular rank is exact at any size
    let r = rank_mod_p(rows, cols, vals);
    if r == rows.min(cols) || modular_is_exact(rows, cols, vals) {
        r
    } else {
        bareiss_rank(&IntMatrix::from_i64(rows, cols, vals).expect("shape"))
    }
}

/// A primitive integer kernel vector (gcd 1, first nonzero entry positive), if the
/// kernel is nontrivial.
pub fn exact_kernel_vector(a: &IntMatrix) -> Option<Vec<BigInt>> {
    exact_kernel_basis(a).into_iter().next()
}

/// Integer basis of the rational kernel, one vector per free column of the RREF.
pub fn exact_kernel_basis(a: &IntMatrix) -> Vec<Vec<BigInt>> {
    let (rows, cols) = (a.rows, a.cols);
    let mut m: Vec<Vec<BigRational>> = a
        .rows_vec()
        .into_iter()
        .map(|r| r.into_iter().map(BigRational::from_integer).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(p, r);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let upd = &f * &m[r][j];
                    m[i][j] -= upd;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.into_iter()
        .map(|f| {
            let mut x = vec![BigRational::zero(); cols];
            x[f] = BigRational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                x[pc] = -m[row][f].clone();
            }
            primitive(&x)
        })
        .collect()
}

fn primitive(x: &[BigRational]) -> Vec<BigInt> {
    let lcm = x.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let mut ints: Vec<BigInt> = x.iter().map(|q| q.numer() * (&lcm / q.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if !g.is_zero() {
        ints.iter_mut().for_each(|v| *v /= &g);
    }
    if ints.iter().find(|v| !v.is_zero()).is_some_and(|v| v.is_negative()) {
        ints.iter_mut().for_each(|v| *v = -v.clone());
    }
    ints
}

pub fn mat_vec_int(a: &IntMatrix, x: &[BigInt]) -> Vec<BigInt> {
    (0..a.rows).map(|i| (0..a.cols).map(|j| a.get(i, j) * &x[j]).sum()).collect()
}

const P: u64 = (1 << 61) - 1;

#[inline]
fn mulmod(a: u64, b: u64) -> u64 {
    let z = a as u128 * b as u128;
    let lo = (z as u64) & P;
    let hi = (z >> 61) as u64;
    let s = lo + hi;
    if s >= P { s - P } else { s }
}

#[inline]
fn submod(a: u64, b: u64) -> u64 {
    if a >= b { a - b } else { a + P - b }
}

fn to_mod(x: i64) -> u64 {
    (x as i128).rem_euclid(P as i128) as u64
}

/// True when every minor of the matrix has absolute value below P/2 (Hadamard).
fn modular_is_exact(rows: usize, cols: usize, vals: &[i64]) -> bool {
    let k = rows.min(cols);
    if k == 0 {
        return true;
    }
    let b = vals.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0) as f64;
    if b == 0.0 {
        return true;
    }
    let log2_bound = k as f64 * (b.log2() + 0.5 * (k as f64).log2());
    log2_bound < 59.0
}

/// Rank mod 2⁶¹−1 by division-free elimination.
fn rank_mod_p(rows: usize, cols: usize, vals: &[i64]) -> usize {
    let mut m: Vec<u64> = vals.iter().map(|&x| to_mod(x)).collect();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| m[i * cols + c] != 0) else { continue };
        if p != r {
            for j in 0..cols {
                m.swap(p * cols + j, r * cols + j);
            }
        }
        let piv = m[r * cols + c];
        for i in r + 1..rows {
            let f = m[i * cols + c];
            if f == 0 {
                continue;
            }
            for j in c + 1..cols {
                let a = mulmod(m[i * cols + j], piv);
                let b = mulmod(f, m[r * cols + j]);
                m[i * cols + j] = submod(a, b);
            }
            m[i * cols + c] = 0;
        }
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    /// Oracle: Bareiss over ℚ, past the Hadamard cutoff, with forced rank drops.
    #[test]
    fn large_sign_matrices_match_bareiss() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for n in [28usize, 32, 40] {
            for drop in 0..3usize {
                let mut v: Vec<i64> = (0..n * n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
                for k in 0..drop {
                    // copy row 0 over row k+1 and column 0 over column k+1
                    for j in 0..n {
                        v[(k + 1) * n + j] = v[j];
                    }
                    for i in 0..n {
                        v[i * n + k + 1] = v[i * n];
                    }
                }
                let oracle = bareiss_rank(&IntMatrix::from_i64(n, n, &v).unwrap());
                assert_eq!(rank_i64(n, n, &v), oracle, "n={n} drop={drop}");
                assert_eq!(is_singular_i64(n, &v), oracle < n);
            }
        }
    }

    fn cofactor_det(m: &[Vec<i64>]) -> i64 {
        let n = m.len();
        if n == 1 {
            return m[0][0];
        }
        (0..n)
            .map(|j| {
                let minor: Vec<Vec<i64>> =
                    m[1..].iter().map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &v)| v).collect()).collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * m[0][j] * cofactor_det(&minor)
            })
            .sum()
    }

    fn random_sign(rng: &mut impl Rng, n: usize) -> Vec<Vec<i64>> {
        (0..n).map(|_| (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect()).collect()
    }

    fn to_int(m: &[Vec<i64>]) -> IntMatrix {
        let n = m.len();
        let c = m[0].len();
        IntMatrix::from_fn(n, c, |i, j| m[i][j])
    }

    #[test]
    fn small_examples() {
        let a = IntMatrix::from_i64(2, 2, &[1, 1, 1, 1]).unwrap();
        assert_eq!(exact_det(&a).unwrap(), BigInt::zero());
        let b = IntMatrix::from_i64(2, 2, &[1, 1, 1, -1]).unwrap();
        assert_eq!(exact_det(&b).unwrap(), BigInt::from(-2));
        assert_eq!(exact_rank(&IntMatrix::from_fn(3, 3, |_, _| 1)), 1);
        assert_eq!(exact_rank(&IntMatrix::from_fn(4, 4, |i, j| (i == j) as i64)), 4);
        let z = IntMatrix::from_i64(2, 2, &[0, 1, 1, 0]).unwrap();
        assert_eq!(exact_det(&z).unwrap(), BigInt::from(-1));
    }

    #[test]
    fn det_matches_cofactor_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in 1..=6 {
            for _ in 0..50 {
                let m = random_sign(&mut rng, n);
                assert_eq!(exact_det(&to_int(&m)).unwrap(), BigInt::from(cofactor_det(&m)));
            }
        }
    }

    #[test]
    fn singular_sign_matrices_have_rank_deficit() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut seen = 0;
        while seen < 30 {
            let m = to_int(&random_sign(&mut rng, 5));
            if exact_det(&m).unwrap().is_zero() {
                seen += 1;
                assert!(exact_rank(&m) <= 4);
                assert!(bareiss_rank(&m) <= 4);
                let k = exact_kernel_vector(&m).unwrap();
                assert!(mat_vec_int(&m, &k).iter().all(|x| x.is_zero()));
            } else {
                assert_eq!(exact_rank(&m), 5);
                assert!(exact_kernel_vector(&m).is_none());
            }
        }
    }

    #[test]
    fn large_entries_fall_back_to_bareiss() {
        let big = 1i64 << 40;
        let m = IntMatrix::from_i64(3, 3, &[big, big, 1, big, big, 1, 1, 2, 3]).unwrap();
        assert_eq!(exact_rank(&m), 2);
        assert_eq!(bareiss_rank(&m), 2);
        assert!(is_singular(&m).unwrap());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(128))]
        #[test]
        fn det_transpose_and_symmetric_permutation(n in 1usize..8, seed in 0u64..10_000) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut m = vec![vec![0i64; n]; n];
            for i in 0..n { for j in i..n { let s = if rng.gen::<bool>() { 1 } else { -1 }; m[i][j] = s; m[j][i] = s; } }
            let a = to_int(&m);
            let d = exact_det(&a).unwrap();
            proptest::prop_assert_eq!(&d, &exact_det(&a.transpose()).unwrap());
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() { perm.swap(i, rng.gen_range(0..=i)); }
            let pa = IntMatrix::from_fn(n, n, |i, j| m[perm[i]][perm[j]]);
            proptest::prop_assert_eq!(&d, &exact_det(&pa).unwrap());
            proptest::prop_assert_eq!(d.is_zero(), is_singular(&a).unwrap());
        }

        #[test]
        fn rank_nullity(rows in 1usize..9, cols in 1usize..9, seed in 0u64..10_000) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let vals: Vec<i64> = (0..rows * cols).map(|_| rng.gen_range(-1..=1)).collect();
            let a = IntMatrix::from_i64(rows, cols, &vals).unwrap();
            let r = exact_rank(&a);
            proptest::prop_assert_eq!(r, bareiss_rank(&a));
            let basis = exact_kernel_basis(&a);
            proptest::prop_assert_eq!(r, cols - basis.len());
            for k in &basis {
                proptest::prop_assert!(mat_vec_int(&a, k).iter().all(|x| x.is_zero()));
            }
        }
    }
}
