//! Lemma reports: one three-valued verdict plus the two sides of the inequality.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::regime::RegimeTag;
use crate::rng::SeedSpec;
use crate::stats::{Interval, McEstimate, Verdict};

/// One side of a checked inequality: a point value and an interval around it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Side {
    pub hat: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Side {
    pub fn exact(x: f64) -> Self {
        Self { hat: x, lo: x, hi: x }
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.lo, self.hi)
    }
}

impl From<&McEstimate> for Side {
    fn from(e: &McEstimate) -> Self {
        Self { hat: e.p_hat, lo: e.ci_low, hi: e.ci_high }
    }
}

impl From<McEstimate> for Side {
    fn from(e: McEstimate) -> Self {
        Side::from(&e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma_id: String,
    pub regime: RegimeTag,
    pub verdict: Verdict,
    pub lhs: Side,
    pub rhs: Side,
    pub params: Value,
    pub seed: Option<SeedSpec>,
    pub notes: Vec<String>,
}

impl LemmaReport {
    pub fn new(lemma_id: &str, regime: RegimeTag, verdict: Verdict, lhs: Side, rhs: Side, params: Value) -> Self {
        Self { lemma_id: lemma_id.to_string(), regime, verdict, lhs, rhs, params, seed: None, notes: Vec::new() }
    }

    pub fn with_seed(mut self, seed: &SeedSpec) -> Self {
        self.seed = Some(seed.clone());
        self
    }

    pub fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }

    /// `ok` means the verdict is anything but a violation.
    pub fn ok(&self) -> bool {
        !self.verdict.is_failure()
    }

    /// Parameters with the notes folded in, as one JSON object string.
    pub fn params_json(&self) -> String {
        let mut p = self.params.clone();
        if !self.notes.is_empty() {
            if let Value::Object(m) = &mut p {
                m.insert("notes".into(), Value::from(self.notes.clone()));
            }
        }
        serde_json::to_string(&p).unwrap_or_else(|_| "{}".into())
    }
}
