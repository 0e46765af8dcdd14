//! Scoring, feature importance and visualization for hierarchical
//! clustering, obtained by treating a dendrogram as a phylogeny and fitting
//! evolutionary models over it.
//!
//! * [`tree`]: dendrograms, edge lengths, cophenetic distances, cuts.
//! * [`clustering`]: distances, Lance–Williams linkages and DIANA.
//! * [`evo`]: Brownian motion for continuous features and an equal-rates
//!   Markov chain for categorical ones.
//! * [`scores`]: cross-validated loss, feature importance and the usual
//!   comparison metrics.
//! * [`simgen`]: synthetic data generators.
//! * [`render`]: SVG evolutionary dendrograms.

pub mod clustering;
pub mod data;
pub mod error;
pub mod evo;
pub mod io;
pub mod render;
pub mod scores;
pub mod simgen;
pub mod tree;

pub use error::{Error, Result};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
