//! Exact and Monte Carlo checks for the anti-concentration machinery behind
//! the singularity of random symmetric ±1 matrices.

pub mod concentration;
pub mod error;
pub mod experiments;
pub mod fourier;
pub mod lcd;
pub mod mc;
pub mod nets;
pub mod numerics;
pub mod output;
pub mod regime;
pub mod report;
pub mod rng;
pub mod sample;
pub mod stats;

pub use error::{LabError, Result};
pub use rng::SeedSpec;
pub use stats::{McEstimate, Verdict};
