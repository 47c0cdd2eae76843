//! N_ε membership (three-valued) and the exhaustive census of Λ_ε at tiny n.
//!
//! N_ε = {v ∈ Λ_ε : P(‖Mv‖₂ ≤ 4ε√n) ≥ (Lε)ⁿ and L_{A,op}(v, ε√n) ≤ (2⁸Lε)ⁿ}.
//! The second condition bounds a supremum from above, and the Lévy estimator only
//! produces lower bounds, so "member" is never certified: it means both conditions
//! are consistent with the evidence.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::concentration::{levy_opnorm_any, small_ball_mc, LevyEstimate};
use crate::error::{ensure, LabError, Result};
use crate::nets::cover::build_box_cover;
use crate::nets::lattice::{lambda_membership, TrivialNetSpec, ENUM_CAP};
use crate::rng::SeedSpec;
use crate::stats::{wilson, Interval, McEstimate, DEFAULT_CONFIDENCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetVerdict {
    ConsistentMember,
    ConsistentNonmember,
    Inconclusive,
}

impl NetVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            NetVerdict::ConsistentMember => "consistent-member",
            NetVerdict::ConsistentNonmember => "consistent-nonmember",
            NetVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    Satisfied,
    Failed,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NepsEvidence {
    pub verdict: NetVerdict,
    /// P(‖Mv‖₂ ≤ 4ε√n); `None` when (Lε)ⁿ > 1 settles the question.
    pub small_ball: Option<McEstimate>,
    pub small_ball_threshold: f64,
    pub small_ball_condition: Condition,
    /// Candidate-center lower bound on L_{A,op}(v, ε√n); `None` when (2⁸Lε)ⁿ ≥ 1.
    pub levy: Option<LevyEstimate>,
    pub levy_threshold: f64,
    pub levy_condition: Condition,
}

pub fn neps_membership(v: &[f64], spec: &TrivialNetSpec, big_l: f64, mu: f64, budget: u64, seed: &SeedSpec) -> Result<NepsEvidence> {
    ensure(lambda_membership(v, spec), || "v is not a point of the trivial net".into())?;
    ensure(spec.window.is_leading(), || "membership uses M with zero block on [d+1, n]; D must be [d]".into())?;
    let (n, d, eps) = (spec.n, spec.window.d(), spec.eps);
    let nf = n as i32;
    let small_ball_threshold = (big_l * eps).powi(nf);
    let levy_threshold = (256.0 * big_l * eps).powi(nf);
    let (small_ball, small_ball_condition) = if small_ball_threshold > 1.0 {
        (None, Condition::Failed)
    } else {
        let e = small_ball_mc(v, 4.0 * eps, n, d, mu, budget, &seed.child("small-ball"))?;
        let c = if e.ci_low >= small_ball_threshold {
            Condition::Satisfied
        } else if e.ci_high < small_ball_threshold {
            Condition::Failed
        } else {
            Condition::Unknown
        };
        (Some(e), c)
    };
    let (levy, levy_condition) = if levy_threshold >= 1.0 || small_ball_condition == Condition::Failed {
        (None, if levy_threshold >= 1.0 { Condition::Satisfied } else { Condition::Unknown })
    } else {
        let l = levy_opnorm_any(v, eps * (n as f64).sqrt(), budget, &seed.child("levy"))?;
        let c = if l.estimate.ci_low > levy_threshold {
            Condition::Failed
        } else if l.estimate.ci_high <= levy_threshold {
            Condition::Satisfied
        } else {
            Condition::Unknown
        };
        (Some(l), c)
    };
    let verdict = match (small_ball_condition, levy_condition) {
        (Condition::Failed, _) | (_, Condition::Failed) => NetVerdict::ConsistentNonmember,
        (Condition::Satisfied, Condition::Satisfied) => NetVerdict::ConsistentMember,
        _ => NetVerdict::Inconclusive,
    };
    Ok(NepsEvidence { verdict, small_ball, small_ball_threshold, small_ball_condition, levy, levy_threshold, levy_condition })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusConfig {
    pub n: usize,
    pub d: usize,
    pub eps: f64,
    pub big_l: f64,
    pub mu: f64,
    pub kappa0: f64,
    pub kappa1: f64,
    pub budget: u64,
    /// Classify at most this many points (uniform subsample above it).
    pub max_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    pub coords_hash: String,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub verdict: NetVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub lambda_size: usize,
    pub classified: usize,
    pub members: usize,
    pub nonmembers: usize,
    pub inconclusive: usize,
    /// Member fraction range from treating inconclusive points as either class.
    pub member_fraction: Interval,
    /// Wilson interval for the consistent-member fraction of Λ_ε (sampling only).
    pub member_wilson: Interval,
    /// Points not covered by the box family (must be zero).
    pub uncovered: usize,
    /// histogram[b] counts points with p̂ ∈ (2^{−b−1}, 2^{−b}]; the last bin holds p̂ = 0.
    pub inner_histogram: Vec<u64>,
    pub rows: Vec<CensusRow>,
}

pub const CENSUS_MAX_N: usize = 14;
const HIST_BINS: usize = 64;

pub fn coords_hash(x: &[i64]) -> String {
    let mut h = Sha256::new();
    for v in x {
        h.update(v.to_le_bytes());
    }
    h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

pub fn net_census_tiny(cfg: &CensusConfig, seed: &SeedSpec) -> Result<CensusReport> {
    ensure(cfg.n <= CENSUS_MAX_N, || format!("census needs n ≤ {CENSUS_MAX_N}, got {}", cfg.n))?;
    ensure(cfg.max_points >= 1, || "max_points must be ≥ 1".into())?;
    let spec = TrivialNetSpec::new(cfg.n, cfg.d, cfg.eps, cfg.kappa0, cfg.kappa1)?;
    let cover = build_box_cover(cfg.n, cfg.d, cfg.eps.min(1.0), cfg.kappa0, cfg.kappa1)?;
    let pts = spec.enumerate(ENUM_CAP)?;
    let uncovered = pts.iter().filter(|p| cover.cover_lookup(p).is_none_or(|b| !cover.contains(&b, p))).count();
    let chosen: Vec<usize> = if pts.len() <= cfg.max_points {
        (0..pts.len()).collect()
    } else {
        // partial Fisher–Yates, then sorted for a stable row order
        let mut idx: Vec<usize> = (0..pts.len()).collect();
        let mut rng = seed.child("subsample").rng(0);
        for i in 0..cfg.max_points {
            let j = i + ((rand::RngCore::next_u64(&mut rng) as u128 * (pts.len() - i) as u128) >> 64) as usize;
            idx.swap(i, j);
        }
        let mut s = idx[..cfg.max_points].to_vec();
        s.sort_unstable();
        s
    };
    let evidence: Vec<Result<(usize, NepsEvidence)>> = chosen
        .par_iter()
        .map(|&i| {
            let v = spec.from_int(&pts[i]);
            neps_membership(&v, &spec, cfg.big_l, cfg.mu, cfg.budget, &seed.child(format!("pt{i}"))).map(|e| (i, e))
        })
        .collect();
    let mut rows = Vec::with_capacity(chosen.len());
    let mut hist = vec![0u64; HIST_BINS + 1];
    let (mut members, mut nonmembers, mut inconclusive) = (0, 0, 0);
    for r in evidence {
        let (i, e) = r?;
        match e.verdict {
            NetVerdict::ConsistentMember => members += 1,
            NetVerdict::ConsistentNonmember => nonmembers += 1,
            NetVerdict::Inconclusive => inconclusive += 1,
        }
        let (p, lo, hi) = e.small_ball.as_ref().map_or((f64::NAN, f64::NAN, f64::NAN), |s| (s.p_hat, s.ci_low, s.ci_high));
        if p.is_finite() {
            let bin = if p <= 0.0 { HIST_BINS } else { ((-p.log2()).floor() as usize).min(HIST_BINS - 1) };
            hist[bin] += 1;
        }
        rows.push(CensusRow { coords_hash: coords_hash(&pts[i]), p_hat: p, ci_low: lo, ci_high: hi, verdict: e.verdict });
    }
    let c = chosen.len().max(1) as f64;
    let (wl, wh) = wilson(members as u64, chosen.len() as u64, DEFAULT_CONFIDENCE);
    Ok(CensusReport {
        lambda_size: pts.len(),
        classified: chosen.len(),
        members,
        nonmembers,
        inconclusive,
        member_fraction: Interval::new(members as f64 / c, (members + inconclusive) as f64 / c),
        member_wilson: Interval::new(wl, wh),
        uncovered,
        inner_histogram: hist,
        rows,
    })
}

impl CensusReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["coords_hash", "p_hat", "ci", "verdict"])?;
        for r in &self.rows {
            wr.write_record([
                r.coords_hash.clone(),
                format!("{}", r.p_hat),
                format!("{};{}", r.ci_low, r.ci_high),
                r.verdict.as_str().to_string(),
            ])?;
        }
        wr.flush().map_err(LabError::from)
    }
}
