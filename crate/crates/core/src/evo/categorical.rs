//! Equal-rates Markov chain for categorical traits.
//!
//! All off-diagonal intensities equal `q`, so transition probabilities have
//! the closed form `P_same(t) = 1/K + (1 - 1/K) e^{-Kqt}` and
//! `P_diff(t) = 1/K - (1/K) e^{-Kqt}`. Likelihoods come from Felsenstein
//! pruning; node marginals from an additional pre-order (outside) pass.

use crate::error::{Error, Result};
use crate::tree::UltrametricTree;

/// Search interval for the rate is `[Q_MIN, Q_MAX_TIMES_HEIGHT / height]`.
pub const Q_MIN: f64 = 1e-8;
pub const Q_MAX_TIMES_HEIGHT: f64 = 1e4;
const RATE_REL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct CtmcFit {
    pub states: Vec<String>,
    pub q_hat: f64,
    pub root_prior: Vec<f64>,
    pub log_lik: f64,
}

impl CtmcFit {
    pub fn n_states(&self) -> usize {
        self.states.len()
    }
}

/// Per-node probability vectors over states, indexed by node id.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePosteriors {
    pub states: Vec<String>,
    pub probs: Vec<Vec<f64>>,
}

#[inline]
fn transition(k: usize, q: f64, t: f64) -> (f64, f64) {
    let kf = k as f64;
    let decay = (-kf * q * t).exp();
    let inv = 1.0 / kf;
    (inv + (1.0 - inv) * decay, inv - inv * decay)
}

/// `out[s] = Σ_x P(s → x; t) v[x]`.
fn propagate(v: &[f64], q: f64, t: f64) -> Vec<f64> {
    let (same, diff) = transition(v.len(), q, t);
    let total: f64 = v.iter().sum();
    v.iter().map(|&x| diff * total + (same - diff) * x).collect()
}

fn normalize(v: &mut [f64]) -> f64 {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
    s
}

fn leaf_partial(label: Option<usize>, k: usize) -> Vec<f64> {
    match label {
        Some(a) => {
            let mut v = vec![0.0; k];
            v[a] = 1.0;
            v
        }
        None => vec![1.0; k],
    }
}

fn check_inputs(tree: &UltrametricTree, labels: &[Option<usize>], k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 states, got {k}")));
    }
    if labels.len() != tree.n_leaves() {
        return Err(Error::InvalidInput(format!("{} labels for {} leaves", labels.len(), tree.n_leaves())));
    }
    if labels.iter().all(Option::is_none) {
        return Err(Error::InvalidInput("every label is missing".into()));
    }
    if let Some(bad) = labels.iter().flatten().find(|&&a| a >= k) {
        return Err(Error::InvalidInput(format!("state {bad} out of range for {k} states")));
    }
    Ok(())
}

/// Post-order pass. Returns normalized partials per node and the summed log
/// scale factors.
fn upward(tree: &UltrametricTree, labels: &[Option<usize>], k: usize, q: f64) -> (Vec<Vec<f64>>, f64) {
    let mut partial: Vec<Vec<f64>> = Vec::with_capacity(tree.n_nodes());
    let mut log_scale = 0.0;
    for u in tree.postorder() {
        let mut v = match tree.children(u) {
            None => leaf_partial(labels[u], k),
            Some((l, r)) => {
                let ml = propagate(&partial[l], q, tree.edge_length(l));
                let mr = propagate(&partial[r], q, tree.edge_length(r));
                ml.iter().zip(&mr).map(|(a, b)| a * b).collect()
            }
        };
        log_scale += normalize(&mut v).ln();
        partial.push(v);
    }
    (partial, log_scale)
}

/// Log-likelihood of the observed leaf states under rate `q` with a uniform
/// root distribution. Missing leaves are `None`.
pub fn pruning_loglik(tree: &UltrametricTree, labels: &[Option<usize>], n_states: usize, q: f64) -> Result<f64> {
    check_inputs(tree, labels, n_states)?;
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidInput(format!("rate must be positive, got {q}")));
    }
    let (partial, log_scale) = upward(tree, labels, n_states, q);
    let root = &partial[tree.root()];
    let lik: f64 = root.iter().sum::<f64>() / n_states as f64;
    Ok(lik.ln() + log_scale)
}

/// Maximum-likelihood rate by golden-section search over `ln q`.
pub fn fit_rate(tree: &UltrametricTree, labels: &[Option<usize>], states: &[String]) -> Result<CtmcFit> {
    let k = states.len();
    check_inputs(tree, labels, k)?;
    let height = tree.tree_height();
    if height.is_nan() || height <= 0.0 {
        return Err(Error::DegenerateTree("tree height is zero".into()));
    }
    let objective = |ln_q: f64| -> Result<f64> {
        let ll = pruning_loglik(tree, labels, k, ln_q.exp())?;
        if ll.is_finite() {
            Ok(ll)
        } else {
            Err(Error::Optimization(format!("log-likelihood is {ll} at q = {}", ln_q.exp())))
        }
    };
    let lo = Q_MIN.ln();
    let hi = (Q_MAX_TIMES_HEIGHT / height).ln().max(lo);

    let (best_x, mut best_f) = golden_section_max(&objective, lo, hi, RATE_REL_TOL)?;
    // The likelihood is often monotone; the bounds themselves are candidates.
    let mut q_hat = best_x.exp();
    for (x, q) in [(lo, Q_MIN), (hi, Q_MAX_TIMES_HEIGHT / height)] {
        let f = objective(x)?;
        if f >= best_f {
            best_f = f;
            q_hat = q;
        }
    }
    Ok(CtmcFit {
        states: states.to_vec(),
        q_hat,
        root_prior: vec![1.0 / k as f64; k],
        log_lik: best_f,
    })
}

fn golden_section_max<F>(f: &F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    // Interval in ln q; width `tol` is a relative tolerance on q.
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

/// Outside vectors: `down[u][s] ∝ P(data outside the subtree of u, X_u = s)`.
fn downward(tree: &UltrametricTree, partial: &[Vec<f64>], prior: &[f64], q: f64) -> Vec<Vec<f64>> {
    let n_nodes = tree.n_nodes();
    let mut down = vec![Vec::new(); n_nodes];
    down[tree.root()] = prior.to_vec();
    for u in tree.postorder().rev() {
        let Some((l, r)) = tree.children(u) else { continue };
        let ml = propagate(&partial[l], q, tree.edge_length(l));
        let mr = propagate(&partial[r], q, tree.edge_length(r));
        for (child, sibling_msg) in [(l, &mr), (r, &ml)] {
            let above: Vec<f64> = down[u].iter().zip(sibling_msg).map(|(a, b)| a * b).collect();
            // P is symmetric, so pushing down uses the same propagation.
            let mut v = propagate(&above, q, tree.edge_length(child));
            normalize(&mut v);
            down[child] = v;
        }
    }
    down
}

/// Exact marginal posterior of the state at every node.
pub fn marginal_posteriors(fit: &CtmcFit, tree: &UltrametricTree, labels: &[Option<usize>]) -> Result<StatePosteriors> {
    let k = fit.n_states();
    check_inputs(tree, labels, k)?;
    let (partial, _) = upward(tree, labels, k, fit.q_hat);
    let down = downward(tree, &partial, &fit.root_prior, fit.q_hat);
    let probs = partial
        .iter()
        .zip(&down)
        .map(|(up, dn)| {
            let mut v: Vec<f64> = up.iter().zip(dn).map(|(a, b)| a * b).collect();
            normalize(&mut v);
            v
        })
        .collect();
    Ok(StatePosteriors { states: fit.states.clone(), probs })
}

/// Posterior of leaf `i`'s state with its own label masked.
pub fn holdout_leaf_posterior(
    fit: &CtmcFit,
    tree: &UltrametricTree,
    labels: &[Option<usize>],
    i: usize,
) -> Result<Vec<f64>> {
    if i >= tree.n_leaves() {
        return Err(Error::InvalidInput(format!("leaf {i} does not exist")));
    }
    let mut masked = labels.to_vec();
    masked[i] = None;
    let mut all = holdout_posteriors(fit, tree, &masked)?;
    Ok(all.swap_remove(i))
}

/// Held-out posteriors for every leaf at once. The outside vector of a
/// leaf does not involve that leaf's own label, so one pre-order pass gives
/// all leave-one-out predictions.
pub fn holdout_posteriors(fit: &CtmcFit, tree: &UltrametricTree, labels: &[Option<usize>]) -> Result<Vec<Vec<f64>>> {
    let k = fit.n_states();
    check_inputs(tree, labels, k)?;
    let (partial, _) = upward(tree, labels, k, fit.q_hat);
    let mut down = downward(tree, &partial, &fit.root_prior, fit.q_hat);
    down.truncate(tree.n_leaves());
    for v in &mut down {
        normalize(v);
    }
    Ok(down)
}

/// Mean over states of the squared gap between the one-hot truth and the
/// predicted probabilities.
pub fn brier(posterior: &[f64], truth: usize) -> f64 {
    let k = posterior.len() as f64;
    posterior
        .iter()
        .enumerate()
        .map(|(a, &p)| {
            let hit = if a == truth { 1.0 } else { 0.0 };
            (hit - p) * (hit - p)
        })
        .sum::<f64>()
        / k
}
