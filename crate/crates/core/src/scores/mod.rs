//! Dendrogram evaluation: cross-validated loss, feature importance and the
//! classical comparison metrics.

mod losses;
mod metrics;
mod report;

pub use losses::{cvl, feature_loss, fom, observed_states, pfis, CvlResult, FomResult};
pub use metrics::{
    adjusted_rand_index, ari, cophenetic_correlation, f1_gold, macro_f1, midranks, pearson, spearman,
    LabelAssignment,
};
pub use report::{
    benchmark_table, write_benchmark_csv, write_pfis_csv, write_reports_csv, write_reports_json, BenchmarkRow,
};

use serde::{Deserialize, Serialize};

use crate::clustering::{standardize, ClusteringRecipe};
use crate::data::FeatureMatrix;
use crate::error::{Error, Result};

/// All scores of one clustering recipe on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub method_id: String,
    pub cvl: f64,
    pub fom: Option<f64>,
    pub coph: Option<f64>,
    pub ari: Option<f64>,
    pub f1_gold: Option<f64>,
    pub feature_names: Vec<String>,
    pub per_feature_loss: Vec<Option<f64>>,
    pub pfis: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreOptions {
    /// Number of clusters for FOM and ARI; defaults to the number of
    /// distinct labels when labels are given.
    pub k: Option<usize>,
    pub assignment: LabelAssignment,
}

/// Computes every score for one recipe. Label-dependent scores are `None`
/// without labels, and FOM is `None` when no `k` is available.
pub fn score(
    x: &FeatureMatrix,
    labels: Option<&[usize]>,
    recipe: &ClusteringRecipe,
    options: &ScoreOptions,
) -> Result<ScoreReport> {
    if let Some(l) = labels {
        if l.len() != x.n_rows() {
            return Err(Error::InvalidInput(format!("{} labels for {} rows", l.len(), x.n_rows())));
        }
    }
    let cv = cvl(x, recipe)?;
    let cols = standardize(x).usable_continuous();
    let dm = recipe.distance_matrix(x, &cols)?;
    let d = recipe.linkage.build(&dm)?;
    let coph = cophenetic_correlation(&dm, &d).ok();
    let n_labels = labels.map(|l| {
        let mut v = l.to_vec();
        v.sort_unstable();
        v.dedup();
        v.len()
    });
    let k = options.k.or(n_labels.filter(|&c| c >= 2));
    let fom = match k {
        Some(k) => Some(fom(x, recipe, k)?.fom),
        None => None,
    };
    let (ari, f1) = match (labels, k) {
        (Some(l), Some(k)) => {
            let f1 = if n_labels.unwrap_or(0) >= 2 { Some(f1_gold(&d, l, options.assignment)?) } else { None };
            (Some(ari(&d.cut(k)?, l)?), f1)
        }
        _ => (None, None),
    };
    Ok(ScoreReport {
        method_id: recipe.id(),
        cvl: cv.cvl,
        fom,
        coph,
        ari,
        f1_gold: f1,
        feature_names: cv.feature_names,
        per_feature_loss: cv.per_feature_loss,
        pfis: pfis(x, &d)?,
    })
}
