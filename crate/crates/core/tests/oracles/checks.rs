//! Property checks against the reference computations. Each runs a proptest
//! runner for `cases` inputs and reports the minimal failing case.

use dendro_evo::clustering::{agglomerate, distances, DistanceMatrix, LinkageSpec, Method, Metric};
use dendro_evo::data::FeatureMatrix;
use dendro_evo::evo::{
    ancestral_states, bm_fit, holdout_leaf_posterior, holdout_posteriors, loo_predict, marginal_posteriors,
    pruning_loglik, CtmcFit,
};
use dendro_evo::scores::{adjusted_rand_index, cophenetic_correlation, spearman};
use dendro_evo::tree::{Dendrogram, UltrametricTree, EDGE_EPS};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use super::*;

pub type Check = fn(u32) -> Result<(), String>;

/// Every check, by name.
pub const ALL: [(&str, Check); 8] = [
    ("loo_matches_block_conditioning", loo_matches_block_conditioning),
    ("ancestral_means_match_augmented_covariance", ancestral_means_match_augmented_covariance),
    ("pruning_matches_enumeration", pruning_matches_enumeration),
    ("posteriors_match_enumeration", posteriors_match_enumeration),
    ("holdout_matches_masked_enumeration", holdout_matches_masked_enumeration),
    ("linkages_match_naive_agglomeration", linkages_match_naive_agglomeration),
    ("cophenetic_correlation_matches_direct_formula", cophenetic_correlation_matches_direct_formula),
    ("ari_and_spearman_match_direct_formulas", ari_and_spearman_match_direct_formulas),
];

fn run<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    TestRunner::new(Config { failure_persistence: None, ..Config::with_cases(cases) }).run(&strategy, test).map_err(|e| e.to_string())
}

fn tree_strategy(max_leaves: usize) -> impl Strategy<Value = Dendrogram> {
    (2..=max_leaves).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec((0usize..64, 0usize..64), n - 1),
            prop::collection::vec(0.1f64..1.0, n - 1),
        )
            .prop_map(|(n, picks, steps)| random_dendrogram(n, &picks, &steps))
    })
}

fn ultrametric(d: &Dendrogram) -> UltrametricTree {
    d.to_ultrametric(EDGE_EPS).unwrap()
}

fn tree_and_values(max_leaves: usize) -> impl Strategy<Value = (Dendrogram, Vec<f64>)> {
    tree_strategy(max_leaves).prop_flat_map(|d| {
        let n = d.n_leaves();
        (Just(d), prop::collection::vec(-5.0f64..5.0, n))
    })
}

fn tree_and_states(max_leaves: usize) -> impl Strategy<Value = (Dendrogram, usize, Vec<Option<usize>>, f64)> {
    (tree_strategy(max_leaves), 2usize..=3)
        .prop_flat_map(|(d, k)| {
            let n = d.n_leaves();
            (Just(d), Just(k), prop::collection::vec(prop::option::weighted(0.8, 0..k), n), 0.05f64..3.0)
        })
        .prop_filter("at least one observed leaf", |(_, _, labels, _)| labels.iter().any(Option::is_some))
}

pub fn points(max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (3..=max_n).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 2), n))
}

fn fit(k: usize, q: f64) -> CtmcFit {
    CtmcFit { states: (0..k).map(|s| s.to_string()).collect(), q_hat: q, root_prior: vec![1.0 / k as f64; k], log_lik: 0.0 }
}

fn squared(dm: &DistanceMatrix) -> DistanceMatrix {
    let sq: Vec<Vec<f64>> = dm.to_square().iter().map(|r| r.iter().map(|v| v * v).collect()).collect();
    DistanceMatrix::from_square(&sq).unwrap()
}

pub fn loo_matches_block_conditioning(cases: u32) -> Result<(), String> {
    run(cases, tree_and_values(8), |(d, y)| {
        let t = ultrametric(&d);
        let f = bm_fit(&t, &y).unwrap();
        prop_assert!((f.mu_hat - gls_mean(&t, &y)).abs() < 1e-9);
        let fast = loo_predict(&f, &y).unwrap();
        for (a, b) in fast.iter().zip(block_loo(&t, &y)) {
            prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
        }
        Ok(())
    })
}

pub fn ancestral_means_match_augmented_covariance(cases: u32) -> Result<(), String> {
    run(cases, tree_and_values(8), |(d, y)| {
        let t = ultrametric(&d);
        let asr = ancestral_states(&bm_fit(&t, &y).unwrap(), &y, 2).unwrap();
        for (a, b) in asr.node_mean.iter().zip(augmented_asr(&t, &y)) {
            prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
        }
        Ok(())
    })
}

pub fn pruning_matches_enumeration(cases: u32) -> Result<(), String> {
    run(cases, tree_and_states(5), |(d, k, labels, q)| {
        let t = ultrametric(&d);
        let fast = pruning_loglik(&t, &labels, k, q).unwrap();
        let slow = enumerated_loglik(&t, &labels, k, q);
        prop_assert!((fast - slow).abs() < 1e-10, "{} vs {}", fast, slow);
        Ok(())
    })
}

pub fn posteriors_match_enumeration(cases: u32) -> Result<(), String> {
    run(cases, tree_and_states(5), |(d, k, labels, q)| {
        let t = ultrametric(&d);
        let post = marginal_posteriors(&fit(k, q), &t, &labels).unwrap();
        let slow = enumerated_posteriors(&t, &labels, k, q);
        for (a, b) in post.probs.iter().zip(&slow) {
            for (x, y) in a.iter().zip(b) {
                prop_assert!((x - y).abs() < 1e-10, "{:?} vs {:?}", a, b);
            }
        }
        Ok(())
    })
}

pub fn holdout_matches_masked_enumeration(cases: u32) -> Result<(), String> {
    run(cases, tree_and_states(5), |(d, k, labels, q)| {
        let t = ultrametric(&d);
        let all = holdout_posteriors(&fit(k, q), &t, &labels).unwrap();
        for i in 0..d.n_leaves() {
            let mut masked = labels.clone();
            masked[i] = None;
            if masked.iter().all(Option::is_none) {
                continue;
            }
            let slow = &enumerated_posteriors(&t, &masked, k, q)[i];
            let one = holdout_leaf_posterior(&fit(k, q), &t, &labels, i).unwrap();
            for s in 0..k {
                prop_assert!((all[i][s] - slow[s]).abs() < 1e-10);
                prop_assert!((one[s] - slow[s]).abs() < 1e-10);
            }
        }
        Ok(())
    })
}

pub fn linkages_match_naive_agglomeration(cases: u32) -> Result<(), String> {
    run(cases, points(9), |pts| {
        let x = FeatureMatrix::from_rows(&pts).unwrap();
        let dm = distances(&x, Metric::Euclidean).unwrap();
        let sq = squared(&dm);
        let cases = [
            (Method::Single, &dm, NaiveLinkage::Single),
            (Method::Complete, &dm, NaiveLinkage::Complete),
            (Method::Average, &dm, NaiveLinkage::Average),
            (Method::McQuitty, &dm, NaiveLinkage::McQuitty),
            (Method::WardD2, &dm, NaiveLinkage::WardEuclidean),
            (Method::WardD, &sq, NaiveLinkage::WardSquared),
            (Method::Centroid, &sq, NaiveLinkage::Centroid),
            (Method::Median, &sq, NaiveLinkage::Median),
        ];
        for (m, input, naive) in cases {
            let d = agglomerate(input, LinkageSpec::new(m)).unwrap();
            let r = same_merges(&merges_as_sets(&d), &naive_agglomerate(&pts, naive), 1e-10);
            prop_assert!(r.is_ok(), "{}: {:?}", m, r);
        }
        Ok(())
    })
}

pub fn cophenetic_correlation_matches_direct_formula(cases: u32) -> Result<(), String> {
    run(cases, points(10), |pts| {
        let x = FeatureMatrix::from_rows(&pts).unwrap();
        let dm = distances(&x, Metric::Euclidean).unwrap();
        let d = agglomerate(&dm, LinkageSpec::new(Method::Average)).unwrap();
        let fast = cophenetic_correlation(&dm, &d).unwrap();
        prop_assert!((fast - direct_coph(&dm.to_square(), &d)).abs() < 1e-12);
        Ok(())
    })
}

pub fn ari_and_spearman_match_direct_formulas(cases: u32) -> Result<(), String> {
    let partitions = (4usize..30).prop_flat_map(|n| (prop::collection::vec(0usize..4, n), prop::collection::vec(0usize..3, n)));
    run(cases, partitions, |(a, b)| {
        let oracle = pair_count_ari(&a, &b);
        prop_assume!(oracle.is_finite());
        prop_assert!((adjusted_rand_index(&a, &b).unwrap() - oracle).abs() < 1e-12);
        Ok(())
    })?;
    let distinct = |x: &[f64]| (0..x.len()).all(|i| (i + 1..x.len()).all(|j| x[i] != x[j]));
    let pairs = prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..40)
        .prop_map(|v| v.into_iter().unzip::<f64, f64, Vec<f64>, Vec<f64>>())
        .prop_filter("distinct values", move |(a, b)| distinct(a) && distinct(b));
    run(cases, pairs, |(a, b)| {
        prop_assert!((spearman(&a, &b).unwrap() - rank_difference_spearman(&a, &b)).abs() < 1e-12);
        Ok(())
    })
}
