//! Nets for flat structured vectors: the lattice Λ_ε, its box cover, the two
//! randomized roundings (basis-net and thmnet) and N_ε membership.

pub mod cover;
pub mod lattice;
pub mod membership;
pub mod rounding;

pub use cover::{build_box_cover, BoxCover, CoverBox};
pub use lattice::{lambda_membership, markov_step_mc, round_vector_to_net, FlatWindowSpec, MarkovStepReport, TrivialNetSpec, VectorRounding};
pub use membership::{net_census_tiny, neps_membership, CensusConfig, CensusReport, NepsEvidence, NetVerdict};
pub use rounding::{round_frame_to_net, Deviations, RoundingReport};
