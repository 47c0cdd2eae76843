//! Least common denominator by a Lipschitz-certified grid scan.
//!
//! Working mode: D_α(v) = inf{φ > 0 : ‖φv‖_T ≤ min(φ‖v‖₂/2, √(αd))}.
//! Intro mode: D_α(v) = inf{φ > 0 : dist(φv, Zᵈ∖{0}) ≤ √(αd)}.
//!
//! The scan works with the gap h(φ) = dist(φ) − bound(φ), admissible iff
//! h ≤ 0. h is Lipschitz with a known constant Λ, so a cell [a, b] with
//! h(a) + h(b) > Λ(b − a) contains no admissible φ. The emitted certificate
//! lists the cell endpoints and can be replayed independently.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, LabError, Result};
use crate::numerics::matrix::{norm2, norm_inf};
use crate::numerics::torus::dist_to_int;

pub const DEFAULT_PHI_MAX: f64 = 32.0;
pub const DEFAULT_RESOLUTION: f64 = 1e-3;
pub const DEGENERATE_NORM: f64 = 1e-12;
/// Refinement stops once a cell is this fraction of the grid resolution.
pub const REFINE_FACTOR: f64 = 1e-6;
/// Relative φ slack when comparing the two modes.
pub const MODE_REL_SLACK: f64 = 1e-6;
/// Floating-point slack on the Lipschitz test.
const FP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LcdMode {
    Working,
    Intro,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LcdStatus {
    Certified,
    CappedAtPhiMax,
    Degenerate,
}

impl LcdStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            LcdStatus::Certified => "certified",
            LcdStatus::CappedAtPhiMax => "capped-at-phi-max",
            LcdStatus::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcdResult {
    pub alpha: f64,
    pub mode: LcdMode,
    /// No admissible φ in (0, bracket_low).
    pub bracket_low: f64,
    /// Admissible within `search_tol` (the witness); +∞ when capped.
    pub bracket_high: f64,
    pub witness_phi: Option<f64>,
    pub status: LcdStatus,
    pub search_tol: f64,
    pub certificate: LcdCertificate,
}

impl LcdResult {
    /// True when D_α(v) > x is certified.
    pub fn exceeds(&self, x: f64) -> bool {
        self.bracket_low > x
    }

    /// True when D_α(v) ≤ x is certified (up to `search_tol`).
    pub fn at_most(&self, x: f64) -> bool {
        self.witness_phi.is_some_and(|w| w <= x)
    }
}

/// Cell endpoints (φ, dist(φv)) covering [start, bracket_low] plus the witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LcdCertificate {
    pub mode: LcdMode,
    pub alpha: f64,
    pub lipschitz: f64,
    pub start: f64,
    pub points: Vec<(f64, f64)>,
    pub witness: Option<(f64, f64)>,
}

/// Distance from x to Zᵈ∖{0}.
pub fn dist_to_nonzero_lattice(x: &[f64]) -> f64 {
    let mut near_zero = true;
    let mut s = 0.0;
    for &xi in x {
        if xi.round() != 0.0 {
            near_zero = false;
        }
        let t = dist_to_int(xi);
        s += t * t;
    }
    if !near_zero {
        return s.sqrt();
    }
    // Nearest point is the origin: step out along the largest coordinate.
    let m = norm_inf(x);
    (norm2(x).powi(2) + 1.0 - 2.0 * m).max(0.0).sqrt()
}

struct Gap<'a> {
    v: &'a [f64],
    mode: LcdMode,
    norm: f64,
    cap: f64,
    buf: Vec<f64>,
}

impl Gap<'_> {
    fn dist(&mut self, phi: f64) -> f64 {
        self.buf.clear();
        self.buf.extend(self.v.iter().map(|x| phi * x));
        match self.mode {
            LcdMode::Working => self.buf.iter().map(|&y| dist_to_int(y).powi(2)).sum::<f64>().sqrt(),
            LcdMode::Intro => dist_to_nonzero_lattice(&self.buf),
        }
    }

    fn bound(&self, phi: f64) -> f64 {
        bound(self.mode, phi, self.norm, self.cap)
    }
}

fn bound(mode: LcdMode, phi: f64, norm: f64, cap: f64) -> f64 {
    match mode {
        LcdMode::Working => (phi * norm / 2.0).min(cap),
        LcdMode::Intro => cap,
    }
}

fn lipschitz(mode: LcdMode, norm: f64) -> f64 {
    match mode {
        LcdMode::Working => 1.5 * norm,
        LcdMode::Intro => norm,
    }
}

fn start_point(mode: LcdMode, v: &[f64]) -> f64 {
    match mode {
        // Below 1/(2‖v‖∞) the nearest lattice point is 0, so ‖φv‖_T = φ‖v‖ > φ‖v‖/2.
        LcdMode::Working => 0.5 / norm_inf(v),
        LcdMode::Intro => 0.0,
    }
}

/// Working-mode LCD.
pub fn lcd(v: &[f64], alpha: f64, phi_max: f64, grid_resolution: f64) -> Result<LcdResult> {
    lcd_with(v, alpha, phi_max, grid_resolution, LcdMode::Working)
}

pub fn lcd_with(v: &[f64], alpha: f64, phi_max: f64, grid_resolution: f64, mode: LcdMode) -> Result<LcdResult> {
    ensure(!v.is_empty(), || "lcd of an empty vector".into())?;
    ensure(alpha > 0.0 && alpha < 1.0, || format!("α={alpha} must lie in (0,1)"))?;
    ensure(phi_max > 0.0, || format!("phi_max={phi_max} must be positive"))?;
    ensure(grid_resolution > 0.0, || format!("grid resolution {grid_resolution} must be positive"))?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(LabError::NonFinite("lcd input"));
    }
    let norm = norm2(v);
    let cap = (alpha * v.len() as f64).sqrt();
    let lip = lipschitz(mode, norm);
    let mut cert = LcdCertificate { mode, alpha, lipschitz: lip, start: 0.0, points: Vec::new(), witness: None };
    if norm < DEGENERATE_NORM {
        return Ok(LcdResult {
            alpha,
            mode,
            bracket_low: 0.0,
            bracket_high: f64::INFINITY,
            witness_phi: None,
            status: LcdStatus::Degenerate,
            search_tol: 0.0,
            certificate: cert,
        });
    }
    let step = grid_resolution.min(0.49 / norm);
    let min_width = grid_resolution * REFINE_FACTOR;
    let search_tol = lip * min_width / 2.0 + FP_SLACK;
    let start = start_point(mode, v);
    cert.start = start;
    let mut gap = Gap { v, mode, norm, cap, buf: Vec::with_capacity(v.len()) };

    let capped = |cert: LcdCertificate| LcdResult {
        alpha,
        mode,
        bracket_low: phi_max,
        bracket_high: f64::INFINITY,
        witness_phi: None,
        status: LcdStatus::CappedAtPhiMax,
        search_tol,
        certificate: cert,
    };
    if start >= phi_max {
        return Ok(capped(cert));
    }
    let mut a = start;
    let mut da = gap.dist(a);
    cert.points.push((a, da));
    if da - gap.bound(a) <= 0.0 {
        cert.witness = Some((a, da));
        return Ok(LcdResult {
            alpha,
            mode,
            bracket_low: a,
            bracket_high: a,
            witness_phi: Some(a),
            status: LcdStatus::Certified,
            search_tol,
            certificate: cert,
        });
    }
    let mut i = 0u64;
    loop {
        i += 1;
        let b = (start + i as f64 * step).min(phi_max);
        let db = gap.dist(b);
        if let Some((lo, (w, dw))) = refine(&mut gap, lip, min_width, search_tol, (a, da), (b, db), &mut cert.points) {
            cert.witness = Some((w, dw));
            return Ok(LcdResult {
                alpha,
                mode,
                bracket_low: lo,
                bracket_high: w,
                witness_phi: Some(w),
                status: LcdStatus::Certified,
                search_tol,
                certificate: cert,
            });
        }
        if b >= phi_max {
            return Ok(capped(cert));
        }
        a = b;
        da = db;
    }
}

/// Searches [a, b] (a already known non-admissible and recorded) for the first
/// admissible φ. On failure every sub-cell is certified and `b` is recorded.
#[allow(clippy::too_many_arguments)]
fn refine(
    gap: &mut Gap<'_>,
    lip: f64,
    min_width: f64,
    tol: f64,
    (a, da): (f64, f64),
    (b, db): (f64, f64),
    points: &mut Vec<(f64, f64)>,
) -> Option<(f64, (f64, f64))> {
    let ha = da - gap.bound(a);
    let hb = db - gap.bound(b);
    if ha + hb > lip * (b - a) + FP_SLACK && hb > 0.0 {
        points.push((b, db));
        return None;
    }
    if b - a <= min_width {
        // Uncertified sliver: min(h(a), h(b)) ≤ Λ(b−a)/2, so b is admissible within tolerance
        // unless it is the larger of the two, in which case a is.
        if hb <= tol || hb <= ha {
            return Some((a, (b, db)));
        }
        return Some((a, (a, da)));
    }
    let m = 0.5 * (a + b);
    let dm = gap.dist(m);
    if let Some(r) = refine(gap, lip, min_width, tol, (a, da), (m, dm), points) {
        return Some(r);
    }
    if dm - gap.bound(m) <= 0.0 {
        return Some((m, (m, dm)));
    }
    refine(gap, lip, min_width, tol, (m, dm), (b, db), points)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReplayError {
    Empty,
    StartMismatch,
    ValueMismatch { index: usize },
    NotIncreasing { index: usize },
    CellNotCertified { index: usize },
    WitnessNotAdmissible,
    BracketMismatch,
}

impl LcdCertificate {
    /// Plain text: a header line, then one `φ dist` pair per line; the witness
    /// (if any) is the final line prefixed by `witness`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mode = match self.mode {
            LcdMode::Working => "working",
            LcdMode::Intro => "intro",
        };
        let _ = writeln!(s, "# lcd-certificate mode={mode} alpha={:e} lipschitz={:e} start={:e}", self.alpha, self.lipschitz, self.start);
        for (p, d) in &self.points {
            let _ = writeln!(s, "{p:e} {d:e}");
        }
        if let Some((p, d)) = self.witness {
            let _ = writeln!(s, "witness {p:e} {d:e}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |m: &str| LabError::InvalidArgument(format!("certificate: {m}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty"))?;
        let mut mode = None;
        let (mut alpha, mut lipschitz, mut start) = (None, None, None);
        for tok in header.trim_start_matches('#').split_whitespace().skip(1) {
            let (k, v) = tok.split_once('=').ok_or_else(|| bad("header token"))?;
            match k {
                "mode" => mode = Some(if v == "intro" { LcdMode::Intro } else { LcdMode::Working }),
                "alpha" => alpha = v.parse().ok(),
                "lipschitz" => lipschitz = v.parse().ok(),
                "start" => start = v.parse().ok(),
                _ => {}
            }
        }
        let pair = |a: &str, b: &str| -> Result<(f64, f64)> {
            Ok((a.parse().map_err(|_| bad("number"))?, b.parse().map_err(|_| bad("number"))?))
        };
        let mut points = Vec::new();
        let mut witness = None;
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let t: Vec<&str> = line.split_whitespace().collect();
            match t.as_slice() {
                ["witness", a, b] => witness = Some(pair(a, b)?),
                [a, b] => points.push(pair(a, b)?),
                _ => return Err(bad("line shape")),
            }
        }
        Ok(Self {
            mode: mode.ok_or_else(|| bad("mode"))?,
            alpha: alpha.ok_or_else(|| bad("alpha"))?,
            lipschitz: lipschitz.ok_or_else(|| bad("lipschitz"))?,
            start: start.ok_or_else(|| bad("start"))?,
            points,
            witness,
        })
    }

    /// Independent check against `v`: recomputes every distance, re-derives the
    /// Lipschitz constant and start point, and re-tests every cell.
    pub fn replay(&self, v: &[f64], search_tol: f64) -> std::result::Result<(), ReplayError> {
        let norm = norm2(v);
        let cap = (self.alpha * v.len() as f64).sqrt();
        let lip = lipschitz(self.mode, norm);
        let gap_at = |phi: f64| {
            let x: Vec<f64> = v.iter().map(|y| phi * y).collect();
            match self.mode {
                LcdMode::Working => x.iter().map(|&y| dist_to_int(y).powi(2)).sum::<f64>().sqrt(),
                LcdMode::Intro => dist_to_nonzero_lattice(&x),
            }
        };
        let first = self.points.first().ok_or(ReplayError::Empty)?;
        if (first.0 - start_point(self.mode, v)).abs() > 1e-12 * (1.0 + first.0) || (self.lipschitz - lip).abs() > 1e-9 * lip {
            return Err(ReplayError::StartMismatch);
        }
        let check = |(p, d): (f64, f64)| (gap_at(p) - d).abs() <= 1e-9 * (1.0 + d);
        for (i, &pt) in self.points.iter().enumerate() {
            if !check(pt) {
                return Err(ReplayError::ValueMismatch { index: i });
            }
        }
        let h = |(p, d): (f64, f64)| d - bound(self.mode, p, norm, cap);
        for (i, w) in self.points.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            if !(b.0 > a.0) {
                return Err(ReplayError::NotIncreasing { index: i });
            }
            if !(h(a) + h(b) > lip * (b.0 - a.0) && h(b) > 0.0) {
                return Err(ReplayError::CellNotCertified { index: i });
            }
        }
        if let Some(wit) = self.witness {
            if !check(wit) {
                return Err(ReplayError::WitnessNotAdmissible);
            }
            if h(wit) > search_tol {
                return Err(ReplayError::WitnessNotAdmissible);
            }
            let last = self.points.last().map(|p| p.0).unwrap_or(wit.0);
            if wit.0 + 1e-15 < last {
                return Err(ReplayError::BracketMismatch);
            }
        }
        Ok(())
    }
}

impl LcdResult {
    /// Replays the embedded certificate against `v` and checks the brackets agree with it.
    pub fn replay(&self, v: &[f64]) -> std::result::Result<(), ReplayError> {
        if self.status == LcdStatus::Degenerate {
            return Ok(());
        }
        self.certificate.replay(v, self.search_tol)?;
        let last = self.certificate.points.last().map(|p| p.0).ok_or(ReplayError::Empty)?;
        let ok = match self.status {
            LcdStatus::Certified => {
                (last - self.bracket_low).abs() <= 1e-15 * (1.0 + last)
                    || self.witness_phi == Some(self.bracket_low)
            }
            LcdStatus::CappedAtPhiMax => last >= self.bracket_low,
            LcdStatus::Degenerate => true,
        };
        if ok { Ok(()) } else { Err(ReplayError::BracketMismatch) }
    }
}

/// One disagreement between the two LCD modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeDisagreement {
    pub v: Vec<f64>,
    pub working: (f64, f64),
    pub intro: (f64, f64),
}

/// Runs both modes and reports whether their brackets overlap. Only pairs
/// where both are certified are compared.
pub fn compare_modes(v: &[f64], alpha: f64, phi_max: f64, res: f64) -> Result<Option<ModeDisagreement>> {
    let w = lcd_with(v, alpha, phi_max, res, LcdMode::Working)?;
    let i = lcd_with(v, alpha, phi_max, res, LcdMode::Intro)?;
    if w.status != LcdStatus::Certified || i.status != LcdStatus::Certified {
        return Ok(None);
    }
    // Witnesses are admissible only up to the search tolerance, and a shallow
    // crossing turns that into a larger φ offset; allow a relative slack.
    let slack = 2.0 * res * REFINE_FACTOR + MODE_REL_SLACK * w.bracket_high.max(i.bracket_high);
    let overlap = w.bracket_low <= i.bracket_high + slack && i.bracket_low <= w.bracket_high + slack;
    Ok((!overlap).then(|| ModeDisagreement {
        v: v.to_vec(),
        working: (w.bracket_low, w.bracket_high),
        intro: (i.bracket_low, i.bracket_high),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::torus::torus_norm;
    use crate::rng::{standard_normal, SeedSpec};
    use proptest::prelude::*;

    fn admissible(v: &[f64], alpha: f64, phi: f64) -> bool {
        let x: Vec<f64> = v.iter().map(|y| phi * y).collect();
        torus_norm(&x) <= (phi * norm2(v) / 2.0).min((alpha * v.len() as f64).sqrt())
    }

    /// First admissible point on a plain uniform grid.
    fn grid_oracle(v: &[f64], alpha: f64, step: f64, hi: f64) -> Option<f64> {
        let mut k = 1u64;
        loop {
            let phi = k as f64 * step;
            if phi > hi {
                return None;
            }
            if admissible(v, alpha, phi) {
                return Some(phi);
            }
            k += 1;
        }
    }

    fn random_unit(d: usize, seed: u64) -> Vec<f64> {
        let mut r = SeedSpec::new(seed, "lcd-unit").rng(0);
        let g: Vec<f64> = (0..d).map(|_| standard_normal(&mut r)).collect();
        crate::numerics::matrix::unit(&g).unwrap()
    }

    #[test]
    fn e1_is_two_thirds() {
        for d in [1usize, 2, 4, 9] {
            let mut v = vec![0.0; d];
            v[0] = 1.0;
            let alpha = (1.0 / 3.0f64).powi(2) / d as f64 * 1.01;
            let r = lcd(&v, alpha, DEFAULT_PHI_MAX, 1e-3).unwrap();
            assert_eq!(r.status, LcdStatus::Certified);
            assert!(r.bracket_low <= 2.0 / 3.0 && 2.0 / 3.0 <= r.bracket_high + 1e-12, "{r:?}");
            assert!(r.bracket_high - r.bracket_low <= 1e-5);
            r.replay(&v).unwrap();
            let o = grid_oracle(&v, alpha, 1e-6, 1.0).unwrap();
            assert!((o - 2.0 / 3.0).abs() <= 2e-6);
        }
    }

    #[test]
    fn three_four_five() {
        let v = [0.6, 0.8];
        let alpha = 0.5;
        assert!(admissible(&v, alpha, 5.0));
        let r = lcd(&v, alpha, 6.0, 1e-4).unwrap();
        assert_eq!(r.status, LcdStatus::Certified);
        assert!(r.bracket_high <= 5.0);
        let o = grid_oracle(&v, alpha, 1e-4, 6.0).unwrap();
        assert!(r.bracket_low <= o + 1e-12 && o - r.bracket_high <= 1e-4, "{} {} {o}", r.bracket_low, r.bracket_high);
        r.replay(&v).unwrap();
        // With a tight cap the first hit is the entry into the √(2α)-ball around φ = 5.
        let r = lcd(&v, 1e-4, 6.0, 1e-4).unwrap();
        let entry = 5.0 - (2e-4f64).sqrt();
        assert!((r.bracket_high - entry).abs() < 1e-6, "{}", r.bracket_high);
    }

    #[test]
    fn capped_and_degenerate() {
        let v = [0.6, 0.8];
        let r = lcd(&v, 1e-4, 4.0, 1e-3).unwrap();
        assert_eq!(r.status, LcdStatus::CappedAtPhiMax);
        assert_eq!(r.bracket_low, 4.0);
        r.replay(&v).unwrap();
        let r = lcd(&[0.0, 1e-14], 0.1, 32.0, 1e-3).unwrap();
        assert_eq!(r.status, LcdStatus::Degenerate);
        assert!(lcd(&[1.0], 1.5, 1.0, 1e-3).is_err());
    }

    #[test]
    fn scale_law() {
        for s in 0..100u64 {
            let v = random_unit(4, s);
            let alpha = 0.05;
            let base = lcd(&v, alpha, 400.0, 1e-4).unwrap();
            assert_eq!(base.status, LcdStatus::Certified);
            for lam in [0.5, 2.0, 10.0] {
                let w: Vec<f64> = v.iter().map(|x| lam * x).collect();
                let r = lcd(&w, alpha, 400.0, 1e-4).unwrap();
                assert_eq!(r.status, LcdStatus::Certified);
                let rel = (r.bracket_high * lam - base.bracket_high).abs() / base.bracket_high;
                assert!(rel <= 1e-6, "seed {s} λ={lam}: {} vs {}", r.bracket_high * lam, base.bracket_high);
                r.replay(&w).unwrap();
            }
        }
    }

    #[test]
    fn certificate_text_roundtrip_and_tamper() {
        let v = random_unit(3, 7);
        let r = lcd(&v, 0.1, 32.0, 1e-2).unwrap();
        let text = r.certificate.to_text();
        let back = LcdCertificate::from_text(&text).unwrap();
        back.replay(&v, r.search_tol).unwrap();
        let mut bad = back.clone();
        if bad.points.len() > 2 {
            bad.points.remove(1);
            bad.points.remove(1);
            // Removing interior points widens a cell; the test may still certify
            // it, so tamper with a value instead as the guaranteed failure.
        }
        bad.points[0].1 += 0.1;
        assert!(bad.replay(&v, r.search_tol).is_err());
        let mut far = back;
        far.witness = Some((far.start, 10.0));
        assert!(far.replay(&v, r.search_tol).is_err());
    }

    #[test]
    fn nonzero_lattice_distance() {
        assert!((dist_to_nonzero_lattice(&[0.0, 0.0]) - 1.0).abs() < 1e-15);
        assert!((dist_to_nonzero_lattice(&[0.4, 0.1]) - (0.36f64 + 0.01).sqrt()).abs() < 1e-15);
        assert!((dist_to_nonzero_lattice(&[1.2, 0.1]) - (0.04f64 + 0.01).sqrt()).abs() < 1e-12);
        // brute force over the small lattice
        let mut r = SeedSpec::new(3, "lat").rng(0);
        for _ in 0..200 {
            let x: Vec<f64> = (0..3).map(|_| 2.0 * standard_normal(&mut r) * 0.3).collect();
            let mut best = f64::INFINITY;
            for a in -3i32..=3 {
                for b in -3i32..=3 {
                    for c in -3i32..=3 {
                        if (a, b, c) == (0, 0, 0) {
                            continue;
                        }
                        let d = ((x[0] - a as f64).powi(2) + (x[1] - b as f64).powi(2) + (x[2] - c as f64).powi(2)).sqrt();
                        best = best.min(d);
                    }
                }
            }
            assert!((dist_to_nonzero_lattice(&x) - best).abs() < 1e-12);
        }
    }

    #[test]
    fn modes_agree_on_unit_vectors() {
        // With √(αd) ≤ 1/3 the two non-degeneracy conditions coincide on unit vectors.
        let mut disagreements = Vec::new();
        for s in 0..100u64 {
            let v = random_unit(4, 1000 + s);
            if let Some(d) = compare_modes(&v, 0.025, 64.0, 1e-3).unwrap() {
                disagreements.push(d);
            }
        }
        assert!(disagreements.is_empty(), "{disagreements:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn monotone_in_alpha(seed in 0u64..10_000, a in 0.01f64..0.2, b in 0.01f64..0.2) {
            let v = random_unit(3, seed);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let r_lo = lcd(&v, lo, 200.0, 1e-3).unwrap();
            let r_hi = lcd(&v, hi, 200.0, 1e-3).unwrap();
            prop_assert!(r_lo.bracket_high + r_lo.search_tol >= r_hi.bracket_low);
        }

        #[test]
        fn brackets_sound(seed in 0u64..10_000, d in 1usize..6, alpha in 0.01f64..0.5) {
            let v = random_unit(d, seed);
            let r = lcd(&v, alpha, 64.0, 1e-3).unwrap();
            prop_assert!(r.replay(&v).is_ok());
            if let Some(w) = r.witness_phi {
                let x: Vec<f64> = v.iter().map(|y| w * y).collect();
                prop_assert!(torus_norm(&x) <= (w / 2.0).min((alpha * d as f64).sqrt()) + r.search_tol);
            }
            // no oracle grid point below bracket_low is admissible
            if let Some(o) = grid_oracle(&v, alpha, 1e-3, r.bracket_low) {
                prop_assert!(o >= r.bracket_low, "oracle {o} < {}", r.bracket_low);
            }
        }
    }
}
