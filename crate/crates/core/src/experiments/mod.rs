//! End-to-end experiments built on the verifiers.

pub mod opnorm;
pub mod rank;
pub mod replacement;
pub mod singularity;
pub mod suite;

pub use singularity::{
    conjectured_rate, fit_exponential, singularity_curve, singularity_exhaustive, singularity_mc, CurveMethod, CurveRow,
    ExactFraction, FitResult, SingularityCurve,
};
pub use rank::{q_lower_diagnostic, rank_evolution, QLowerReport, RankCell, RankEvolution, RankEvolutionRecord};
pub use opnorm::{verify_opnorm_concentration, OpnormReport};
pub use replacement::{verify_replacement_chain, ReplacementReport};
pub use suite::{lemma_suite, run_lemma, SuiteConfig, SUITE_IDS};
