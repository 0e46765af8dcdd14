//! Distances and dendrogram construction.

mod diana;
mod linkage;

pub use diana::diana;
pub use linkage::{agglomerate, LinkageSpec, Method};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Column, ColumnData, FeatureMatrix};
use crate::error::{Error, Result};
use crate::tree::Dendrogram;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Manhattan,
    Canberra,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Euclidean, Metric::Manhattan, Metric::Canberra];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Manhattan => "manhattan",
            Metric::Canberra => "canberra",
        }
    }

    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            Metric::Canberra => a
                .iter()
                .zip(b)
                .map(|(x, y)| {
                    let den = x.abs() + y.abs();
                    if den == 0.0 {
                        0.0
                    } else {
                        (x - y).abs() / den
                    }
                })
                .sum(),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" => Ok(Metric::Euclidean),
            "manhattan" => Ok(Metric::Manhattan),
            "canberra" => Ok(Metric::Canberra),
            other => Err(Error::InvalidInput(format!("unknown distance metric '{other}'"))),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Symmetric matrix of pairwise dissimilarities with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
    metric: Option<Metric>,
}

impl DistanceMatrix {
    /// Wraps a full square matrix, checking symmetry, sign and diagonal.
    pub fn from_square(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput("distance matrix is not square".into()));
            }
            for (j, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::InvalidInput(format!("entry ({i},{j}) = {v}")));
                }
                if i == j && v != 0.0 {
                    return Err(Error::InvalidInput("nonzero diagonal".into()));
                }
                if rows[j][i] != v {
                    return Err(Error::InvalidInput(format!("asymmetric at ({i},{j})")));
                }
                entries.push(v);
            }
        }
        Ok(DistanceMatrix { n, entries, metric: None })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn metric(&self) -> Option<Metric> {
        self.metric
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Upper-triangle entries in row-major order.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * (self.n.saturating_sub(1)) / 2);
        for i in 0..self.n {
            for j in i + 1..self.n {
                out.push(self.get(i, j));
            }
        }
        out
    }

    pub fn to_square(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }
}

/// Pairwise distances over the continuous columns of `x`; categorical
/// columns are ignored.
pub fn distances(x: &FeatureMatrix, metric: Metric) -> Result<DistanceMatrix> {
    let cols = x.continuous_indices();
    distances_on(x, &cols, metric)
}

/// Pairwise distances over the listed continuous columns.
pub fn distances_on(x: &FeatureMatrix, cols: &[usize], metric: Metric) -> Result<DistanceMatrix> {
    let n = x.n_rows();
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 rows for distances, got {n}")));
    }
    if cols.is_empty() {
        return Err(Error::InvalidInput("no continuous columns to compute distances on".into()));
    }
    let rows = x.continuous_rows(cols);
    let entries: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let rows = &rows;
            (0..n).map(move |j| if i == j { 0.0 } else { metric.distance(&rows[i], &rows[j]) })
        })
        .collect();
    Ok(DistanceMatrix { n, entries, metric: Some(metric) })
}

/// Result of z-scoring the continuous columns of a matrix.
#[derive(Debug, Clone)]
pub struct Standardized {
    pub data: FeatureMatrix,
    /// Continuous columns with zero variance; left unscaled and excluded
    /// from distances and scoring.
    pub constant: Vec<usize>,
}

impl Standardized {
    /// Continuous columns that carry information.
    pub fn usable_continuous(&self) -> Vec<usize> {
        self.data
            .continuous_indices()
            .into_iter()
            .filter(|j| !self.constant.contains(j))
            .collect()
    }

    /// All columns that can be scored: usable continuous plus categorical.
    pub fn usable_features(&self) -> Vec<usize> {
        (0..self.data.n_cols()).filter(|j| !self.constant.contains(j)).collect()
    }
}

/// Mean and sample standard deviation (divisor n - 1).
pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = v.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Z-scores a single column; `None` when it has no spread.
pub fn zscore(v: &[f64]) -> Option<Vec<f64>> {
    let (mean, sd) = mean_sd(v);
    if sd.is_nan() || sd <= 1e-12 * (1.0 + mean.abs()) {
        return None;
    }
    Some(v.iter().map(|x| (x - mean) / sd).collect())
}

/// Transforms every continuous column to mean 0 and sample variance 1.
pub fn standardize(x: &FeatureMatrix) -> Standardized {
    let mut constant = Vec::new();
    let columns = x
        .columns()
        .iter()
        .enumerate()
        .map(|(j, c)| match &c.data {
            ColumnData::Continuous(v) => match zscore(v) {
                Some(z) => Column::continuous(c.name.clone(), z),
                None => {
                    log::warn!("feature '{}' is constant and will be excluded", c.name);
                    constant.push(j);
                    c.clone()
                }
            },
            ColumnData::Categorical { .. } => c.clone(),
        })
        .collect();
    let data = FeatureMatrix::with_row_labels(columns, x.row_labels().to_vec())
        .expect("standardizing preserves shape");
    Standardized { data, constant }
}

/// How a dendrogram is built from data: linkage, distance metric and
/// whether continuous columns are z-scored first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusteringRecipe {
    pub linkage: LinkageSpec,
    pub metric: Metric,
    pub standardize: bool,
}

impl ClusteringRecipe {
    pub fn new(method: Method, metric: Metric) -> Self {
        ClusteringRecipe { linkage: LinkageSpec::new(method), metric, standardize: true }
    }

    /// Identifier such as `ward.D2/euclidean`.
    pub fn id(&self) -> String {
        format!("{}/{}", self.linkage.method.name(), self.metric.name())
    }

    /// Builds a dendrogram on the listed continuous columns of `x`.
    pub fn build_on(&self, x: &FeatureMatrix, cols: &[usize]) -> Result<Dendrogram> {
        let dm = self.distance_matrix(x, cols)?;
        let d = self.linkage.build(&dm)?;
        d.with_labels(x.row_labels().to_vec())
    }

    /// Builds a dendrogram on every continuous column of `x`.
    pub fn build(&self, x: &FeatureMatrix) -> Result<Dendrogram> {
        self.build_on(x, &x.continuous_indices())
    }

    /// Distance matrix used by [`ClusteringRecipe::build_on`].
    pub fn distance_matrix(&self, x: &FeatureMatrix, cols: &[usize]) -> Result<DistanceMatrix> {
        if !self.standardize {
            return distances_on(x, cols, self.metric);
        }
        let sub = x.select_columns(cols);
        let st = standardize(&sub);
        let usable = st.usable_continuous();
        if usable.is_empty() {
            return Err(Error::Degenerate("every clustering feature is constant".into()));
        }
        distances_on(&st.data, &usable, self.metric)
    }
}
