//! Evolutionary models fitted over a dendrogram viewed as a phylogeny.

pub mod categorical;
pub mod continuous;

pub use categorical::{
    brier, fit_rate, holdout_leaf_posterior, holdout_posteriors, marginal_posteriors, pruning_loglik, CtmcFit,
    StatePosteriors,
};
pub use continuous::{ancestral_states, bm_fit, loo_predict, AncestralStates, BrownianFit};
