//! Brownian motion on an ultrametric tree.
//!
//! Leaf values are jointly Gaussian with mean `mu` and covariance
//! `sigma2 * C`, where `C[i][j]` is the depth of the most recent common
//! ancestor of leaves `i` and `j`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::tree::UltrametricTree;

/// Lower bound on the fitted rate.
pub const SIGMA2_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct BrownianFit {
    pub mu_hat: f64,
    pub sigma2_hat: f64,
    cov_factor: Cholesky<f64, Dyn>,
    tree: UltrametricTree,
}

impl BrownianFit {
    pub fn tree(&self) -> &UltrametricTree {
        &self.tree
    }

    /// Lower-triangular Cholesky factor of the leaf covariance.
    pub fn cov_factor(&self) -> DMatrix<f64> {
        self.cov_factor.l()
    }

    /// `C⁻¹ (y - mu)`.
    fn whitened_residuals(&self, y: &[f64]) -> DVector<f64> {
        let r = DVector::from_iterator(y.len(), y.iter().map(|v| v - self.mu_hat));
        self.cov_factor.solve(&r)
    }
}

/// Maximum-likelihood (generalized least squares) fit of root state and rate.
pub fn bm_fit(tree: &UltrametricTree, y: &[f64]) -> Result<BrownianFit> {
    let n = tree.n_leaves();
    if n < 2 {
        return Err(Error::InvalidInput(format!("Brownian fit needs at least 2 leaves, got {n}")));
    }
    if y.len() != n {
        return Err(Error::InvalidInput(format!("{} values for {} leaves", y.len(), n)));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite trait value".into()));
    }
    if tree.tree_height().is_nan() || tree.tree_height() <= 0.0 {
        return Err(Error::DegenerateTree("tree height is zero".into()));
    }
    let shared = tree.shared_depth_matrix();
    let c = DMatrix::from_fn(n, n, |i, j| shared[i][j]);
    let chol = c
        .cholesky()
        .ok_or_else(|| Error::DegenerateCovariance("leaf covariance is not positive definite".into()))?;

    let ones = DVector::from_element(n, 1.0);
    let w = chol.solve(&ones);
    let yv = DVector::from_column_slice(y);
    let mu_hat = w.dot(&yv) / w.dot(&ones);
    let r = yv.add_scalar(-mu_hat);
    let mut sigma2_hat = r.dot(&chol.solve(&r)) / n as f64;
    if !sigma2_hat.is_finite() {
        return Err(Error::DegenerateCovariance("non-finite rate estimate".into()));
    }
    if sigma2_hat < SIGMA2_FLOOR {
        log::warn!("Brownian rate estimate {sigma2_hat:e} clamped to {SIGMA2_FLOOR:e}");
        sigma2_hat = SIGMA2_FLOOR;
    }
    Ok(BrownianFit { mu_hat, sigma2_hat, cov_factor: chol, tree: tree.clone() })
}

/// Leave-one-out predictions: the conditional mean of each leaf given all
/// others, with root state and rate held at their full-data estimates.
pub fn loo_predict(fit: &BrownianFit, y: &[f64]) -> Result<Vec<f64>> {
    let n = fit.tree.n_leaves();
    if y.len() != n {
        return Err(Error::InvalidInput(format!("{} values for {} leaves", y.len(), n)));
    }
    let a = fit.whitened_residuals(y);
    let inv = fit.cov_factor.inverse();
    Ok((0..n).map(|i| y[i] - a[i] / inv[(i, i)]).collect())
}

/// Conditional means at every node plus linear interpolation along edges.
#[derive(Debug, Clone, PartialEq)]
pub struct AncestralStates {
    /// Indexed by node id; leaves carry their observed values.
    pub node_mean: Vec<f64>,
    /// For each node, samples `(position, mean)` along the edge from its
    /// parent (position 0) to the node (position 1). Empty for the root.
    pub edge_samples: Vec<Vec<(f64, f64)>>,
}

impl AncestralStates {
    pub fn root_mean(&self) -> f64 {
        *self.node_mean.last().expect("non-empty tree")
    }
}

/// Ancestral state reconstruction by exact Gaussian conditioning.
///
/// With `a = C⁻¹(y - mu)`, the mean at node `u` is `mu + Σ_i cov(u, i) a_i`.
/// Walking down from the root, a child `c` of `p` differs from its parent
/// only on the leaves below `c`, giving `mean(c) = mean(p) + len(c) * Σ_{i<c} a_i`.
pub fn ancestral_states(fit: &BrownianFit, y: &[f64], samples_per_edge: usize) -> Result<AncestralStates> {
    let tree = &fit.tree;
    let n = tree.n_leaves();
    if y.len() != n {
        return Err(Error::InvalidInput(format!("{} values for {} leaves", y.len(), n)));
    }
    if samples_per_edge < 2 {
        return Err(Error::InvalidInput("samples_per_edge must be at least 2".into()));
    }
    let a = fit.whitened_residuals(y);
    let n_nodes = tree.n_nodes();
    let mut below = vec![0.0; n_nodes];
    for u in tree.postorder() {
        below[u] = match tree.children(u) {
            None => a[u],
            Some((l, r)) => below[l] + below[r],
        };
    }
    let mut node_mean = vec![0.0; n_nodes];
    let root = tree.root();
    node_mean[root] = fit.mu_hat;
    for u in tree.postorder().rev().skip(1) {
        let p = tree.parent(u).expect("non-root");
        node_mean[u] = node_mean[p] + tree.edge_length(u) * below[u];
    }
    // Leaves reproduce their data up to rounding; store the data exactly.
    node_mean[..n].copy_from_slice(y);

    let edge_samples = (0..n_nodes)
        .map(|u| match tree.parent(u) {
            None => Vec::new(),
            Some(p) => {
                let (from, to) = (node_mean[p], node_mean[u]);
                (0..samples_per_edge)
                    .map(|k| {
                        let t = k as f64 / (samples_per_edge - 1) as f64;
                        (t, from + t * (to - from))
                    })
                    .collect()
            }
        })
        .collect();
    Ok(AncestralStates { node_mean, edge_samples })
}
