//! Covering Λ_ε by (N, κ, d)-boxes indexed by level tuples.
//!
//! For a scaled net point X = v√n/(4ε) the flat coordinates lie in
//! J = {N ≤ |x| ≤ κN}, and each other coordinate lies in I_ℓ: I₀ = {|x| ≤ N},
//! I_ℓ = {2^{ℓ−1}N < |x| ≤ 2^ℓN}. Admissible tuples satisfy Σ_{ℓ_j>0} 4^{ℓ_j} ≤ 16n/κ₀².

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCover {
    pub n: usize,
    pub d: usize,
    pub eps: f64,
    pub kappa0: f64,
    pub kappa1: f64,
    pub kappa: f64,
    /// N = κ₀/(4ε); not necessarily an integer.
    pub scale: f64,
    /// 16n/κ₀².
    pub level_budget: f64,
    pub max_level: u32,
}

/// One box B(ℓ_{d+1}, …, ℓ_n); `levels[j]` belongs to coordinate d + j.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoverBox {
    pub levels: Vec<u32>,
}

pub fn build_box_cover(n: usize, d: usize, eps: f64, kappa0: f64, kappa1: f64) -> Result<BoxCover> {
    ensure(eps > 0.0 && eps <= 1.0, || format!("ε={eps} outside (0,1]"))?;
    ensure(0.0 < kappa0 && kappa0 < 1.0 && 1.0 < kappa1, || format!("need 0 < κ₀ < 1 < κ₁, got {kappa0}, {kappa1}"))?;
    ensure(d >= 1 && d < n, || format!("need 1 ≤ d < n, got d={d}, n={n}"))?;
    let kappa = (kappa1 / kappa0).max(256.0 / kappa0.powi(4));
    let level_budget = 16.0 * n as f64 / (kappa0 * kappa0);
    let mut max_level = 0;
    while 4f64.powi(max_level as i32 + 1) <= level_budget {
        max_level += 1;
    }
    Ok(BoxCover { n, d, eps, kappa0, kappa1, kappa, scale: kappa0 / (4.0 * eps), level_budget, max_level })
}

impl BoxCover {
    fn weight(l: u32) -> f64 {
        if l == 0 { 0.0 } else { 4f64.powi(l as i32) }
    }

    pub fn flat_contains(&self, x: i64) -> bool {
        let a = x.unsigned_abs() as f64;
        a >= self.scale && a <= self.kappa * self.scale
    }

    pub fn level_contains(&self, level: u32, x: i64) -> bool {
        let a = x.unsigned_abs() as f64;
        if level == 0 {
            a <= self.scale
        } else {
            let top = self.scale * 2f64.powi(level as i32);
            a > top / 2.0 && a <= top
        }
    }

    /// The ℓ with x ∈ I_ℓ.
    pub fn level_of(&self, x: i64) -> u32 {
        let a = x.unsigned_abs() as f64;
        let mut l = 0;
        while a > self.scale * 2f64.powi(l as i32) {
            l += 1;
        }
        l
    }

    pub fn is_admissible(&self, levels: &[u32]) -> bool {
        levels.len() == self.n - self.d && levels.iter().map(|&l| Self::weight(l)).sum::<f64>() <= self.level_budget
    }

    pub fn contains(&self, b: &CoverBox, x: &[i64]) -> bool {
        x.len() == self.n
            && x[..self.d].iter().all(|&xi| self.flat_contains(xi))
            && x[self.d..].iter().zip(&b.levels).all(|(&xi, &l)| self.level_contains(l, xi))
    }

    /// The box of the family containing the scaled net point `x`, if any.
    pub fn cover_lookup(&self, x: &[i64]) -> Option<CoverBox> {
        if x.len() != self.n || !x[..self.d].iter().all(|&xi| self.flat_contains(xi)) {
            return None;
        }
        let levels: Vec<u32> = x[self.d..].iter().map(|&xi| self.level_of(xi)).collect();
        self.is_admissible(&levels).then_some(CoverBox { levels })
    }

    /// |J| from the floor/ceiling formula.
    pub fn flat_cardinality(&self) -> u64 {
        let lo = self.scale.ceil();
        let hi = (self.kappa * self.scale).floor();
        if hi < lo { 0 } else { 2 * (hi - lo + 1.0) as u64 }
    }

    /// |I_ℓ| from the floor formula.
    pub fn level_cardinality(&self, level: u32) -> u64 {
        if level == 0 {
            2 * self.scale.floor() as u64 + 1
        } else {
            let top = self.scale * 2f64.powi(level as i32);
            2 * (top.floor() - (top / 2.0).floor()) as u64
        }
    }

    pub fn box_cardinality(&self, b: &CoverBox) -> f64 {
        let flat = (self.flat_cardinality() as f64).powi(self.d as i32);
        b.levels.iter().fold(flat, |acc, &l| acc * self.level_cardinality(l) as f64)
    }

    /// (κN)ⁿ.
    pub fn box_size_bound(&self) -> f64 {
        (self.kappa * self.scale).powi(self.n as i32)
    }

    pub fn family_size_bound(&self) -> f64 {
        self.kappa.powi(self.n as i32)
    }

    /// Number of admissible tuples by dynamic programming over the weight budget.
    pub fn family_size(&self) -> u128 {
        let budget = self.level_budget.floor() as usize;
        // ways[s] = tuples so far with weight exactly s
        let mut ways = vec![0u128; budget + 1];
        ways[0] = 1;
        for _ in 0..self.n - self.d {
            let mut next = vec![0u128; budget + 1];
            for (s, &w) in ways.iter().enumerate() {
                if w == 0 {
                    continue;
                }
                next[s] += w;
                for l in 1..=self.max_level {
                    let t = s + Self::weight(l) as usize;
                    if t <= budget {
                        next[t] += w;
                    }
                }
            }
            ways = next;
        }
        ways.iter().sum()
    }

    /// Lazy iterator over the family in lexicographic order.
    pub fn boxes(&self) -> LevelTuples<'_> {
        LevelTuples { cover: self, cur: vec![0; self.n - self.d], used: 0.0, started: false, done: false }
    }
}

pub struct LevelTuples<'a> {
    cover: &'a BoxCover,
    cur: Vec<u32>,
    used: f64,
    started: bool,
    done: bool,
}

impl Iterator for LevelTuples<'_> {
    type Item = CoverBox;

    fn next(&mut self) -> Option<CoverBox> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(CoverBox { levels: self.cur.clone() });
        }
        let c = self.cover;
        // Rightmost position that can still be raised once everything after it is reset.
        let mut tail = 0.0;
        for i in (0..self.cur.len()).rev() {
            let l = self.cur[i];
            let base = self.used - tail - BoxCover::weight(l);
            if l < c.max_level && base + BoxCover::weight(l + 1) <= c.level_budget {
                self.cur[i] = l + 1;
                self.cur[i + 1..].iter_mut().for_each(|x| *x = 0);
                self.used = base + BoxCover::weight(l + 1);
                return Some(CoverBox { levels: self.cur.clone() });
            }
            tail += BoxCover::weight(l);
        }
        self.done = true;
        None
    }
}
