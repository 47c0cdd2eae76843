//! CSV writers. Floats use the shortest round-trip formatting, so identical
//! results give identical bytes. Intervals inside one column are written `lo;hi`.

use std::io::Write;

use crate::error::{LabError, Result};
use crate::experiments::rank::RankEvolution;
use crate::experiments::singularity::SingularityCurve;
use crate::report::{LemmaReport, Side};
use crate::rng::SeedSpec;

pub const CURVE_HEADER: [&str; 9] = ["n", "method", "count", "total", "p_hat", "ci_low", "ci_high", "seed", "samples"];
pub const RANK_HEADER: [&str; 5] = ["m", "rk_m", "rk_m_minus_1", "count", "total"];
pub const LEMMA_HEADER: [&str; 9] = ["lemma_id", "regime_tag", "verdict", "lhs_hat", "lhs_ci", "rhs_hat", "rhs_ci", "params_json", "seed"];

fn seed_str(s: &Option<SeedSpec>) -> String {
    s.as_ref().map(|s| s.to_string()).unwrap_or_default()
}

fn ci(s: &Side) -> String {
    format!("{};{}", s.lo, s.hi)
}

pub fn write_curve_csv<W: Write>(w: W, curve: &SingularityCurve) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(CURVE_HEADER)?;
    for r in &curve.rows {
        wr.write_record([
            r.n.to_string(),
            r.method.as_str().to_string(),
            r.count.to_string(),
            r.total.to_string(),
            r.p_hat.to_string(),
            r.ci_low.to_string(),
            r.ci_high.to_string(),
            seed_str(&r.seed),
            r.samples.to_string(),
        ])?;
    }
    wr.flush().map_err(LabError::from)
}

pub fn write_rank_csv<W: Write>(w: W, ev: &RankEvolution) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(RANK_HEADER)?;
    for rec in &ev.records {
        for c in &rec.cells {
            wr.write_record([rec.m.to_string(), c.rk_m.to_string(), c.rk_m_minus_1.to_string(), c.count.to_string(), rec.total.to_string()])?;
        }
    }
    wr.flush().map_err(LabError::from)
}

pub fn write_lemma_csv<W: Write>(w: W, reports: &[LemmaReport]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(LEMMA_HEADER)?;
    for r in reports {
        wr.write_record([
            r.lemma_id.clone(),
            r.regime.as_str().to_string(),
            r.verdict.as_str().to_string(),
            r.lhs.hat.to_string(),
            ci(&r.lhs),
            r.rhs.hat.to_string(),
            ci(&r.rhs),
            r.params_json(),
            seed_str(&r.seed),
        ])?;
    }
    wr.flush().map_err(LabError::from)
}
