//! Prediction losses of evolutionary models fitted over dendrograms.

use rayon::prelude::*;

use crate::clustering::{standardize, zscore, ClusteringRecipe, Standardized};
use crate::data::{Column, ColumnData, FeatureMatrix};
use crate::error::{Error, Result};
use crate::evo::{bm_fit, brier, fit_rate, holdout_posteriors, loo_predict};
use crate::tree::{Dendrogram, UltrametricTree, EDGE_EPS};

/// Mean leave-one-out inaccuracy of one feature on a tree: squared error on
/// the z-scored feature (Brownian motion) or Brier score (equal-rates
/// Markov chain).
pub fn feature_loss(tree: &UltrametricTree, column: &Column) -> Result<f64> {
    match &column.data {
        ColumnData::Continuous(v) => {
            let y = zscore(v).ok_or_else(|| Error::Degenerate(format!("feature '{}' is constant", column.name)))?;
            let fit = bm_fit(tree, &y)?;
            let pred = loo_predict(&fit, &y)?;
            let sse: f64 = y.iter().zip(&pred).map(|(a, b)| (a - b) * (a - b)).sum();
            Ok(sse / y.len() as f64)
        }
        ColumnData::Categorical { levels, codes } => {
            let (states, labels) = observed_states(levels, codes);
            if states.len() < 2 {
                return Err(Error::Degenerate(format!("feature '{}' has a single category", column.name)));
            }
            let fit = fit_rate(tree, &labels, &states)?;
            let post = holdout_posteriors(&fit, tree, &labels)?;
            let total: f64 = post
                .iter()
                .zip(&labels)
                .map(|(p, l)| brier(p, l.expect("observed")))
                .sum();
            Ok(total / labels.len() as f64)
        }
    }
}

/// Restricts categorical levels to those that occur and recodes.
pub fn observed_states(levels: &[String], codes: &[usize]) -> (Vec<String>, Vec<Option<usize>>) {
    let mut used = vec![false; levels.len()];
    for &c in codes {
        used[c] = true;
    }
    let mut remap = vec![usize::MAX; levels.len()];
    let mut states = Vec::new();
    for (i, level) in levels.iter().enumerate() {
        if used[i] {
            remap[i] = states.len();
            states.push(level.clone());
        }
    }
    (states, codes.iter().map(|&c| Some(remap[c])).collect())
}

fn is_scoreable(st: &Standardized, j: usize) -> bool {
    if st.constant.contains(&j) {
        return false;
    }
    match &st.data.column(j).data {
        ColumnData::Continuous(_) => true,
        ColumnData::Categorical { codes, .. } => codes.iter().any(|&c| c != codes[0]),
    }
}

/// Per-feature losses and their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct CvlResult {
    pub cvl: f64,
    pub feature_names: Vec<String>,
    /// `None` for features that were skipped (constant or degenerate fold).
    pub per_feature_loss: Vec<Option<f64>>,
}

fn mean_present(values: &[Option<f64>]) -> Option<f64> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    if present.is_empty() {
        None
    } else {
        Some(present.iter().sum::<f64>() / present.len() as f64)
    }
}

/// Cross-validated loss: hold each feature out of tree construction, predict
/// it back from the remaining tree, and average the per-feature losses.
pub fn cvl(x: &FeatureMatrix, recipe: &ClusteringRecipe) -> Result<CvlResult> {
    let p = x.n_cols();
    if p < 2 {
        return Err(Error::InvalidInput(format!("CVL needs at least 2 features, got {p}")));
    }
    let st = standardize(x);
    let clustering_cols = st.usable_continuous();
    let per_feature_loss: Vec<Option<f64>> = (0..p)
        .into_par_iter()
        .map(|j| {
            let name = &x.column(j).name;
            if !is_scoreable(&st, j) {
                log::warn!("feature '{name}' skipped: no variation");
                return None;
            }
            let cols: Vec<usize> = clustering_cols.iter().copied().filter(|&c| c != j).collect();
            if cols.is_empty() {
                log::warn!("feature '{name}' skipped: nothing left to cluster on");
                return None;
            }
            let fold = recipe
                .build_on(x, &cols)
                .and_then(|d| d.to_ultrametric(EDGE_EPS))
                .and_then(|t| feature_loss(&t, x.column(j)));
            match fold {
                Ok(loss) => Some(loss),
                Err(e) => {
                    log::warn!("feature '{name}' skipped in {}: {e}", recipe.id());
                    None
                }
            }
        })
        .collect();
    let cvl = mean_present(&per_feature_loss)
        .ok_or_else(|| Error::Degenerate(format!("no feature could be scored for {}", recipe.id())))?;
    Ok(CvlResult { cvl, feature_names: x.column_names().iter().map(|s| s.to_string()).collect(), per_feature_loss })
}

/// Phylogenetic feature importance: one minus the leave-one-out loss of each
/// feature on the full dendrogram. For z-scored continuous features this is
/// an R² (the squared-error total is compared against `SS_tot = n`).
pub fn pfis(x: &FeatureMatrix, d: &Dendrogram) -> Result<Vec<Option<f64>>> {
    if d.n_leaves() != x.n_rows() {
        return Err(Error::InvalidInput("dendrogram and data sizes differ".into()));
    }
    let tree = d.to_ultrametric(EDGE_EPS)?;
    let st = standardize(x);
    Ok((0..x.n_cols())
        .into_par_iter()
        .map(|j| {
            if !is_scoreable(&st, j) {
                return None;
            }
            match feature_loss(&tree, x.column(j)) {
                Ok(loss) => Some(1.0 - loss),
                Err(e) => {
                    log::warn!("importance of '{}' not computed: {e}", x.column(j).name);
                    None
                }
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FomResult {
    pub fom: f64,
    pub per_feature: Vec<Option<f64>>,
}

/// Figure of merit: for each continuous feature, cluster without it, cut
/// into `k` groups and take the root-mean-square deviation of the held-out
/// feature around its cluster means. Values are z-scored when the recipe
/// standardizes. Categorical features are not scored.
pub fn fom(x: &FeatureMatrix, recipe: &ClusteringRecipe, k: usize) -> Result<FomResult> {
    let n = x.n_rows();
    if k < 2 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let st = standardize(x);
    let values = if recipe.standardize { &st.data } else { x };
    let usable = st.usable_continuous();
    let per_feature: Vec<Option<f64>> = (0..x.n_cols())
        .into_par_iter()
        .map(|j| {
            if !usable.contains(&j) {
                return None;
            }
            let cols: Vec<usize> = usable.iter().copied().filter(|&c| c != j).collect();
            if cols.is_empty() {
                return None;
            }
            let part = match recipe.build_on(x, &cols).and_then(|d| d.cut(k)) {
                Ok(p) => p,
                Err(e) => {
                    log::warn!("FOM fold for '{}' failed: {e}", x.column(j).name);
                    return None;
                }
            };
            let v = values.column(j).as_continuous().expect("continuous");
            Some(within_cluster_rms(v, &part.assignment, k))
        })
        .collect();
    let fom = mean_present(&per_feature).ok_or_else(|| Error::Degenerate("no feature could be scored for FOM".into()))?;
    Ok(FomResult { fom, per_feature })
}

fn within_cluster_rms(v: &[f64], assignment: &[usize], k: usize) -> f64 {
    let mut sum = vec![0.0; k];
    let mut count = vec![0usize; k];
    for (&x, &c) in v.iter().zip(assignment) {
        sum[c] += x;
        count[c] += 1;
    }
    let ss: f64 = v
        .iter()
        .zip(assignment)
        .map(|(&x, &c)| {
            let m = sum[c] / count[c] as f64;
            (x - m) * (x - m)
        })
        .sum();
    (ss / v.len() as f64).sqrt()
}
