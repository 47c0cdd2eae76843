//! Constant sets. The asymptotic constants are unusable at desk scale, so every
//! experiment runs under either the `paper` set or an explicit `lab` set and
//! carries the tag into its report.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeTag {
    Paper,
    Lab,
}

impl RegimeTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeTag::Paper => "paper",
            RegimeTag::Lab => "lab",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeConstants {
    pub tag: RegimeTag,
    pub kappa0: f64,
    pub kappa1: f64,
    pub c0: f64,
    pub big_l: f64,
    pub mu: f64,
    pub d: usize,
    pub alpha: f64,
    /// γ = e^{−cn}, stored through `c`.
    pub c: f64,
    pub delta_comp: f64,
    pub rho_comp: f64,
    /// Constant of the conditioned-walk LCD bound.
    pub r_lcd: f64,
    /// Constant of the robust-rank bound.
    pub r_rank: f64,
    /// Constant of the random-inversion bound; configuration only.
    pub r_invert: f64,
    /// Theorem-level inverse Littlewood–Offord constants (R, c₁, c₂).
    pub lwo_r: f64,
    pub lwo_c1: f64,
    pub lwo_c2: f64,
}

impl RegimeConstants {
    /// Constants of the asymptotic argument for dimension `n`, from the
    /// compressibility parameters δ, ρ.
    pub fn paper(n: usize, delta_comp: f64, rho_comp: f64) -> Result<Self> {
        let c0 = (2f64.powi(-24)).min(rho_comp * delta_comp.sqrt());
        let d = ((c0 * c0 * n as f64) / 2.0).ceil().max(1.0) as usize;
        let s = Self {
            tag: RegimeTag::Paper,
            kappa0: rho_comp,
            kappa1: delta_comp.powf(-0.5) / 2.0,
            c0,
            big_l: 2.0,
            mu: 0.25,
            d,
            alpha: 2f64.powi(-24),
            c: 2f64.powi(-50),
            delta_comp,
            rho_comp,
            r_lcd: 2f64.powi(32) / (c0 * c0),
            r_rank: 2f64.powi(39) / c0.powi(3),
            r_invert: f64::NAN,
            lwo_r: f64::NAN,
            lwo_c1: f64::NAN,
            lwo_c2: f64::NAN,
        };
        s.validate()?;
        Ok(s)
    }

    /// Desk-scale defaults.
    pub fn lab() -> Self {
        Self {
            tag: RegimeTag::Lab,
            kappa0: 0.5,
            kappa1: 2.0,
            c0: 0.25,
            big_l: 2.0,
            mu: 0.25,
            d: 2,
            alpha: 0.05,
            c: 0.05,
            delta_comp: 0.1,
            rho_comp: 0.5,
            r_lcd: 64.0,
            r_rank: 4.0,
            r_invert: 1.0,
            lwo_r: 1.0,
            lwo_c1: 1.0,
            lwo_c2: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(0.0 < self.kappa0 && self.kappa0 < 1.0 && 1.0 < self.kappa1, || {
            format!("need 0 < κ₀ < 1 < κ₁, got κ₀={}, κ₁={}", self.kappa0, self.kappa1)
        })?;
        ensure(self.mu > 0.0 && self.mu <= 1.0, || format!("μ={} outside (0,1]", self.mu))?;
        ensure(self.d >= 1, || "d must be ≥ 1".into())?;
        if self.tag == RegimeTag::Paper {
            ensure(self.c0 <= 2f64.powi(-24), || format!("paper regime needs c₀ ≤ 2⁻²⁴, got {}", self.c0))?;
        }
        Ok(())
    }

    /// γ = e^{−cn}.
    pub fn gamma(&self, n: usize) -> f64 {
        (-self.c * n as f64).exp()
    }

    /// κ = max{κ₁/κ₀, 2⁸κ₀⁻⁴}.
    pub fn cover_kappa(&self) -> f64 {
        (self.kappa1 / self.kappa0).max(256.0 / self.kappa0.powi(4))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_constants() {
        let p = RegimeConstants::paper(1 << 20, 0.1, 0.1).unwrap();
        assert_eq!(p.c0, 2f64.powi(-24));
        assert_eq!(p.d, 1);
        assert_eq!(p.r_lcd, 2f64.powi(80));
        let mut bad = p.clone();
        bad.c0 = 0.1;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn lab_is_valid() {
        let l = RegimeConstants::lab();
        l.validate().unwrap();
        assert_eq!(l.cover_kappa(), 4096.0);
    }
}
