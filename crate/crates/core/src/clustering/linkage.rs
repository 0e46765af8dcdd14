//! Agglomerative clustering through the Lance–Williams recurrence.

use serde::{Deserialize, Serialize};

use super::{diana, DistanceMatrix};
use crate::error::{Error, Result};
use crate::tree::{Dendrogram, Merge};

/// Clustering methods. The `*Agnes` variants are aliases that let the
/// Agnes rows of the usual method grid be named separately:
/// `WeightedAgnes` is McQuitty, `AverageAgnes` is average linkage and
/// `WardAgnes` is Ward on squared distances (`ward.D2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "single")]
    Single,
    #[serde(rename = "complete")]
    Complete,
    #[serde(rename = "average")]
    Average,
    #[serde(rename = "mcquitty")]
    McQuitty,
    #[serde(rename = "ward.D")]
    WardD,
    #[serde(rename = "ward.D2")]
    WardD2,
    #[serde(rename = "median")]
    Median,
    #[serde(rename = "centroid")]
    Centroid,
    #[serde(rename = "agnes.weighted")]
    WeightedAgnes,
    #[serde(rename = "agnes.average")]
    AverageAgnes,
    #[serde(rename = "agnes.ward")]
    WardAgnes,
    #[serde(rename = "diana")]
    Diana,
}

impl Method {
    /// The 11-method comparison grid: three Agnes linkages, seven
    /// agglomerative linkages and DIANA.
    pub const GRID: [Method; 11] = [
        Method::WeightedAgnes,
        Method::AverageAgnes,
        Method::WardAgnes,
        Method::WardD,
        Method::Complete,
        Method::Single,
        Method::WardD2,
        Method::Average,
        Method::McQuitty,
        Method::Median,
        Method::Diana,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Single => "single",
            Method::Complete => "complete",
            Method::Average => "average",
            Method::McQuitty => "mcquitty",
            Method::WardD => "ward.D",
            Method::WardD2 => "ward.D2",
            Method::Median => "median",
            Method::Centroid => "centroid",
            Method::WeightedAgnes => "agnes.weighted",
            Method::AverageAgnes => "agnes.average",
            Method::WardAgnes => "agnes.ward",
            Method::Diana => "diana",
        }
    }

    /// Resolves the Agnes aliases to the linkage they compute.
    pub fn canonical(self) -> Method {
        match self {
            Method::WeightedAgnes => Method::McQuitty,
            Method::AverageAgnes => Method::Average,
            Method::WardAgnes => Method::WardD2,
            m => m,
        }
    }

    /// Linkages whose merge heights never decrease.
    pub fn is_monotone(self) -> bool {
        !matches!(self.canonical(), Method::Median | Method::Centroid)
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let m = match s.trim() {
            "single" => Method::Single,
            "complete" => Method::Complete,
            "average" | "upgma" => Method::Average,
            "mcquitty" | "wpgma" => Method::McQuitty,
            "ward.D" | "ward_d" | "ward.d" => Method::WardD,
            "ward.D2" | "ward_d2" | "ward.d2" | "ward" => Method::WardD2,
            "median" => Method::Median,
            "centroid" => Method::Centroid,
            "agnes.weighted" | "weighted_agnes" => Method::WeightedAgnes,
            "agnes.average" | "average_agnes" => Method::AverageAgnes,
            "agnes.ward" | "ward_agnes" => Method::WardAgnes,
            "diana" => Method::Diana,
            other => return Err(Error::InvalidInput(format!("unknown clustering method '{other}'"))),
        };
        Ok(m)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkageSpec {
    pub method: Method,
}

impl LinkageSpec {
    pub fn new(method: Method) -> Self {
        LinkageSpec { method }
    }

    /// Builds the dendrogram, dispatching to DIANA where requested.
    pub fn build(&self, dm: &DistanceMatrix) -> Result<Dendrogram> {
        if self.method == Method::Diana {
            diana(dm)
        } else {
            agglomerate(dm, *self)
        }
    }
}

/// Post-merge dissimilarity between cluster `i ∪ j` and cluster `k`.
#[inline]
fn lance_williams(method: Method, dik: f64, djk: f64, dij: f64, ni: f64, nj: f64, nk: f64) -> f64 {
    match method {
        Method::Single => dik.min(djk),
        Method::Complete => dik.max(djk),
        Method::Average => (ni * dik + nj * djk) / (ni + nj),
        Method::McQuitty => 0.5 * (dik + djk),
        Method::WardD | Method::WardD2 => ((ni + nk) * dik + (nj + nk) * djk - nk * dij) / (ni + nj + nk),
        Method::Centroid => {
            let nij = ni + nj;
            (ni * dik + nj * djk) / nij - ni * nj * dij / (nij * nij)
        }
        Method::Median => 0.5 * dik + 0.5 * djk - 0.25 * dij,
        _ => unreachable!("aliases are resolved before the recurrence"),
    }
}

/// Agglomerative clustering. At each step the pair with the smallest
/// dissimilarity is merged; ties go to the lexicographically smallest
/// `(i, j)` pair of active slots. The merged cluster takes slot `i`.
pub fn agglomerate(dm: &DistanceMatrix, spec: LinkageSpec) -> Result<Dendrogram> {
    let method = spec.method.canonical();
    if method == Method::Diana {
        return Err(Error::InvalidInput("agglomerate does not build DIANA trees".into()));
    }
    let n = dm.n();
    if n == 0 {
        return Err(Error::InvalidInput("empty distance matrix".into()));
    }
    let squared = method == Method::WardD2;
    let mut d: Vec<f64> = (0..n * n)
        .map(|idx| {
            let v = dm.get(idx / n, idx % n);
            if squared {
                v * v
            } else {
                v
            }
        })
        .collect();
    let mut active = vec![true; n];
    let mut size = vec![1.0f64; n];
    let mut node: Vec<usize> = (0..n).collect();
    let mut nn = vec![usize::MAX; n];
    let mut nn_dist = vec![f64::INFINITY; n];

    let rescan = |r: usize, d: &[f64], active: &[bool], nn: &mut [usize], nn_dist: &mut [f64]| {
        nn[r] = usize::MAX;
        nn_dist[r] = f64::INFINITY;
        for c in r + 1..n {
            if active[c] && d[r * n + c] < nn_dist[r] {
                nn_dist[r] = d[r * n + c];
                nn[r] = c;
            }
        }
    };
    for r in 0..n {
        rescan(r, &d, &active, &mut nn, &mut nn_dist);
    }

    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for step in 0..n.saturating_sub(1) {
        let mut i = usize::MAX;
        let mut best = f64::INFINITY;
        for r in 0..n {
            if active[r] && nn[r] != usize::MAX && (i == usize::MAX || nn_dist[r] < best) {
                best = nn_dist[r];
                i = r;
            }
        }
        let j = nn[i];
        let dij = d[i * n + j];
        let height = if squared { dij.max(0.0).sqrt() } else { dij.max(0.0) };
        merges.push(Merge { left: node[i], right: node[j], height });

        let (ni, nj) = (size[i], size[j]);
        active[j] = false;
        for k in 0..n {
            if !active[k] || k == i {
                continue;
            }
            let v = lance_williams(method, d[i * n + k], d[j * n + k], dij, ni, nj, size[k]);
            d[i * n + k] = v;
            d[k * n + i] = v;
        }
        size[i] = ni + nj;
        node[i] = n + step;

        for r in 0..n {
            if !active[r] {
                continue;
            }
            if r == i || nn[r] == i || nn[r] == j {
                rescan(r, &d, &active, &mut nn, &mut nn_dist);
            } else if r < i {
                let v = d[r * n + i];
                if v < nn_dist[r] || (v == nn_dist[r] && i < nn[r]) {
                    nn_dist[r] = v;
                    nn[r] = i;
                }
            }
        }
    }
    Dendrogram::unlabeled(n, merges)
}
