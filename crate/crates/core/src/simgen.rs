//! Synthetic data: features evolving down a complete binary tree, and a
//! labeled mixture of two Gaussians.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{Column, FeatureMatrix};
use crate::error::{Error, Result};
use crate::tree::{Dendrogram, Merge};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Number of doubling steps; the data has `2^depth` rows.
    pub depth: u32,
    /// Per-feature noise base; the noise added at step `k` scales as `sigma^k`.
    pub sigma: Vec<f64>,
    pub seed: u64,
    /// Read `sigma^k` as a variance (default) or as a standard deviation.
    pub noise_scale_is_variance: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            depth: 7,
            sigma: (0..6).map(|j| 2f64.powi(j - 2)).collect(),
            seed: 0,
            noise_scale_is_variance: true,
        }
    }
}

impl SimConfig {
    pub fn n_features(&self) -> usize {
        self.sigma.len()
    }

    fn validate(&self) -> Result<()> {
        if !(1..=20).contains(&self.depth) {
            return Err(Error::InvalidInput(format!("depth must be in 1..=20, got {}", self.depth)));
        }
        if self.sigma.is_empty() || self.sigma.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidInput("sigma must be a non-empty list of positive reals".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TreeData {
    pub data: FeatureMatrix,
    /// Generating tree; the node created at step `k` sits at height `depth - k`.
    pub tree: Dendrogram,
}

/// Independent generator for the noise term of node `i` at step `k` of
/// feature `j`. Every draw has its own ChaCha stream, so values do not
/// depend on generation order.
fn noise_rng(seed: u64, j: usize, k: u32, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((j as u64) << 40) | ((k as u64) << 32) | i as u64);
    rng
}

/// Tree-structured features: starting from 0 at the root, every node of
/// step `k - 1` spawns children `i` and `2^(k-1) + i`, each adding its own
/// Gaussian noise of scale `sigma_j^k`. Leaves after `depth` steps are the rows.
pub fn simulate_tree_data(cfg: &SimConfig) -> Result<TreeData> {
    cfg.validate()?;
    let n = 1usize << cfg.depth;
    let columns = cfg
        .sigma
        .iter()
        .enumerate()
        .map(|(j, &s)| {
            let mut theta = vec![0.0f64];
            for k in 1..=cfg.depth {
                let scale = s.powi(k as i32);
                let sd = if cfg.noise_scale_is_variance { scale.sqrt() } else { scale };
                let half = theta.len();
                let mut next = vec![0.0; 2 * half];
                for i in 0..2 * half {
                    let z: f64 = noise_rng(cfg.seed, j, k, i).sample(StandardNormal);
                    next[i] = theta[i % half] + sd * z;
                }
                theta = next;
            }
            Column::continuous(format!("X{}", j + 1), theta)
        })
        .collect();
    let labels: Vec<String> = (1..=n).map(|i| format!("s{i}")).collect();
    let data = FeatureMatrix::with_row_labels(columns, labels.clone())?;
    Ok(TreeData { data, tree: generating_tree(cfg.depth)?.with_labels(labels)? })
}

fn generating_tree(depth: u32) -> Result<Dendrogram> {
    let n = 1usize << depth;
    let mut merges = Vec::with_capacity(n - 1);
    // Node ids of the current level, indexed by position.
    let mut level: Vec<usize> = (0..n).collect();
    for k in (1..=depth).rev() {
        let half = level.len() / 2;
        let mut up = Vec::with_capacity(half);
        for i in 0..half {
            up.push(n + merges.len());
            merges.push(Merge { left: level[i], right: level[half + i], height: (depth - k + 1) as f64 });
        }
        level = up;
    }
    Dendrogram::unlabeled(n, merges)
}

#[derive(Debug, Clone)]
pub struct LabeledData {
    pub data: FeatureMatrix,
    pub labels: Vec<usize>,
}

/// `Y ~ Bernoulli(1/2)`, `(X1, X2) | Y ~ N((2Y, 2Y), I)`.
pub fn simulate_two_gaussians(n: usize, seed: u64) -> Result<LabeledData> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 instances, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels = Vec::with_capacity(n);
    let (mut x1, mut x2) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let y = usize::from(rng.random_bool(0.5));
        let m = 2.0 * y as f64;
        x1.push(m + rng.sample::<f64, _>(StandardNormal));
        x2.push(m + rng.sample::<f64, _>(StandardNormal));
        labels.push(y);
    }
    let data = FeatureMatrix::new(vec![Column::continuous("X1", x1), Column::continuous("X2", x2)])?;
    Ok(LabeledData { data, labels })
}
