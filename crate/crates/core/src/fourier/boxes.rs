//! Finite unions of closed axis-aligned boxes with exact γ-measure.
//!
//! Measures use the Gaussian with coordinate standard deviation (2π)^{−1/2}.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, LabError, Result};
use crate::numerics::special::{gauss_sd, gaussian_interval_mass};

pub const DEFAULT_BOX_CAP: usize = 4096;
pub const DEFAULT_CELL_CAP: u128 = 20_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        ensure(lo.len() == hi.len() && !lo.is_empty(), || "box bounds must share a positive dimension".into())?;
        ensure(lo.iter().zip(&hi).all(|(a, b)| a <= b && !a.is_nan() && !b.is_nan()), || "box needs lo ≤ hi".into())?;
        Ok(Self { lo, hi })
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    pub fn gaussian_measure(&self) -> f64 {
        let sd = gauss_sd();
        self.lo.iter().zip(&self.hi).map(|(&a, &b)| gaussian_interval_mass(a, b, sd)).product()
    }

    /// {b − a : a ∈ other, b ∈ self}.
    pub fn minus(&self, other: &AxisBox) -> AxisBox {
        AxisBox {
            lo: self.lo.iter().zip(&other.hi).map(|(a, b)| a - b).collect(),
            hi: self.hi.iter().zip(&other.lo).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn translate(&self, y: &[f64]) -> AxisBox {
        AxisBox {
            lo: self.lo.iter().zip(y).map(|(a, b)| a + b).collect(),
            hi: self.hi.iter().zip(y).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn intersect(&self, other: &AxisBox) -> Option<AxisBox> {
        let lo: Vec<f64> = self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect();
        let hi: Vec<f64> = self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect();
        lo.iter().zip(&hi).all(|(a, b)| a <= b).then_some(AxisBox { lo, hi })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxUnion {
    pub dim: usize,
    pub boxes: Vec<AxisBox>,
}

impl BoxUnion {
    pub fn new(dim: usize, boxes: Vec<AxisBox>) -> Result<Self> {
        ensure(dim >= 1, || "box union needs dim ≥ 1".into())?;
        for b in &boxes {
            if b.dim() != dim {
                return Err(LabError::DimensionMismatch { expected: dim, got: b.dim() });
            }
        }
        Ok(Self { dim, boxes })
    }

    pub fn empty(dim: usize) -> Self {
        Self { dim, boxes: Vec::new() }
    }

    pub fn full(dim: usize) -> Self {
        Self { dim, boxes: vec![AxisBox { lo: vec![f64::NEG_INFINITY; dim], hi: vec![f64::INFINITY; dim] }] }
    }

    pub fn single(b: AxisBox) -> Self {
        Self { dim: b.dim(), boxes: vec![b] }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.boxes.iter().any(|b| b.contains(x))
    }

    pub fn translate(&self, y: &[f64]) -> BoxUnion {
        BoxUnion { dim: self.dim, boxes: self.boxes.iter().map(|b| b.translate(y)).collect() }
    }

    /// Minkowski sum with a single box.
    pub fn plus_box(&self, b: &AxisBox) -> BoxUnion {
        let neg = AxisBox { lo: b.hi.iter().map(|x| -x).collect(), hi: b.lo.iter().map(|x| -x).collect() };
        BoxUnion { dim: self.dim, boxes: self.boxes.iter().map(|a| a.minus(&neg)).collect() }
    }

    /// A − B as the union of pairwise box differences.
    pub fn minus(&self, other: &BoxUnion, cap: usize) -> Result<BoxUnion> {
        let cells = self.boxes.len() as u128 * other.boxes.len() as u128;
        if cells > cap as u128 {
            return Err(LabError::BoxBlowup { cells, cap: cap as u128 });
        }
        let mut boxes = Vec::with_capacity(cells as usize);
        for a in &self.boxes {
            for b in &other.boxes {
                boxes.push(a.minus(b));
            }
        }
        Ok(BoxUnion { dim: self.dim, boxes })
    }

    pub fn diffset(&self) -> Result<BoxUnion> {
        self.minus(self, DEFAULT_BOX_CAP)
    }

    /// Points whose coordinates listed in `fixed` take the given values,
    /// as a union over the remaining coordinates (in order).
    pub fn fiber(&self, fixed: &[(usize, f64)]) -> Result<BoxUnion> {
        ensure(fixed.len() < self.dim, || "fiber must leave at least one free coordinate".into())?;
        ensure(fixed.iter().all(|(i, _)| *i < self.dim), || "fiber coordinate out of range".into())?;
        let free: Vec<usize> = (0..self.dim).filter(|i| !fixed.iter().any(|(j, _)| j == i)).collect();
        let boxes = self
            .boxes
            .iter()
            .filter(|b| fixed.iter().all(|&(i, v)| b.lo[i] <= v && v <= b.hi[i]))
            .map(|b| AxisBox { lo: free.iter().map(|&i| b.lo[i]).collect(), hi: free.iter().map(|&i| b.hi[i]).collect() })
            .collect();
        Ok(BoxUnion { dim: free.len(), boxes })
    }

    /// Vertical fiber S(θ_[k]) ⊂ R²: the first k coordinates are fixed.
    pub fn vertical_fiber(&self, theta_k: &[f64]) -> Result<BoxUnion> {
        ensure(theta_k.len() + 2 == self.dim, || "vertical fiber needs k = dim − 2 fixed values".into())?;
        self.fiber(&theta_k.iter().copied().enumerate().collect::<Vec<_>>())
    }

    /// Translated horizontal fiber F_y(S; a, b) = {θ_[k] : (θ_[k], a, b) ∈ S − y}.
    pub fn horizontal_fiber(&self, y: &[f64], a: f64, b: f64) -> Result<BoxUnion> {
        ensure(y.len() == self.dim && self.dim >= 3, || "horizontal fiber needs dim ≥ 3 and matching y".into())?;
        let neg: Vec<f64> = y.iter().map(|x| -x).collect();
        let k = self.dim - 2;
        self.translate(&neg).fiber(&[(k, a), (k + 1, b)])
    }

    /// Exact γ-measure by recursive sweep over compressed coordinates.
    pub fn gaussian_measure(&self) -> Result<f64> {
        self.gaussian_measure_capped(DEFAULT_CELL_CAP)
    }

    pub fn gaussian_measure_capped(&self, cap: u128) -> Result<f64> {
        let refs: Vec<&AxisBox> = self.boxes.iter().collect();
        let mut work = 0u128;
        let m = sweep(&refs, 0, self.dim, &mut work, cap)?;
        Ok(m.clamp(0.0, 1.0))
    }

    /// Breakpoints in each coordinate, sorted and deduplicated.
    pub fn breakpoints(&self, coord: usize) -> Vec<f64> {
        let mut x: Vec<f64> = self.boxes.iter().flat_map(|b| [b.lo[coord], b.hi[coord]]).collect();
        x.sort_by(f64::total_cmp);
        x.dedup();
        x
    }

    /// Values in `coord` covering every distinct set of active boxes:
    /// every breakpoint and one interior point per elementary interval.
    pub fn probe_values(&self, coord: usize) -> Vec<f64> {
        let bp = self.breakpoints(coord);
        let mut out = Vec::with_capacity(2 * bp.len() + 1);
        for (i, &x) in bp.iter().enumerate() {
            if x.is_finite() {
                out.push(x);
            }
            if let Some(&y) = bp.get(i + 1) {
                out.push(interior(x, y));
            }
        }
        if out.is_empty() {
            out.push(0.0);
        }
        out
    }
}

fn interior(a: f64, b: f64) -> f64 {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => 0.5 * (a + b),
        (false, true) => b - 1.0,
        (true, false) => a + 1.0,
        _ => 0.0,
    }
}

fn sweep(boxes: &[&AxisBox], coord: usize, dim: usize, work: &mut u128, cap: u128) -> Result<f64> {
    if boxes.is_empty() {
        return Ok(0.0);
    }
    if coord == dim {
        return Ok(1.0);
    }
    let sd = gauss_sd();
    let mut bp: Vec<f64> = boxes.iter().flat_map(|b| [b.lo[coord], b.hi[coord]]).collect();
    bp.sort_by(f64::total_cmp);
    bp.dedup();
    let mut total = 0.0;
    for w in bp.windows(2) {
        let (a, b) = (w[0], w[1]);
        *work += 1;
        if *work > cap {
            return Err(LabError::BoxBlowup { cells: *work, cap });
        }
        let mass = gaussian_interval_mass(a, b, sd);
        if mass == 0.0 {
            continue;
        }
        let active: Vec<&AxisBox> = boxes.iter().copied().filter(|x| x.lo[coord] <= a && b <= x.hi[coord]).collect();
        if !active.is_empty() {
            total += mass * sweep(&active, coord + 1, dim, work, cap)?;
        }
    }
    Ok(total)
}

/// Γ_{r,s} = {θ ∈ R^{k+2} : ‖θ_[k]‖₂ ≤ r, |θ_{k+1}|, |θ_{k+2}| ≤ s}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub k: usize,
    pub r: f64,
    pub s: f64,
}

impl Cylinder {
    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.k + 2
            && theta[..self.k].iter().map(|x| x * x).sum::<f64>() <= self.r * self.r
            && theta[self.k].abs() <= self.s
            && theta[self.k + 1].abs() <= self.s
    }
}
