//! Slow, direct reference computations used to check the library.
#![allow(dead_code, clippy::needless_range_loop)]

pub mod checks;

use dendro_evo::tree::{Dendrogram, Merge, UltrametricTree};

/// Builds a dendrogram from arbitrary numbers: `picks` choose which two
/// active clusters merge, `steps` are positive height increments.
pub fn random_dendrogram(n: usize, picks: &[(usize, usize)], steps: &[f64]) -> Dendrogram {
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::new();
    let mut h = 0.0;
    for m in 0..n - 1 {
        let (a, b) = picks[m % picks.len()];
        let i = a % active.len();
        let mut j = b % (active.len() - 1);
        if j >= i {
            j += 1;
        }
        h += steps[m % steps.len()];
        let (x, y) = (active[i], active[j]);
        merges.push(Merge { left: x, right: y, height: h });
        active.retain(|&v| v != x && v != y);
        active.push(n + m);
    }
    Dendrogram::unlabeled(n, merges).unwrap()
}

// ---- dense linear algebra ----------------------------------------------

/// Inverse by Gauss–Jordan elimination with partial pivoting.
pub fn inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        m.swap(c, p);
        let piv = m[c][c];
        assert!(piv.abs() > 1e-300, "singular matrix");
        for v in m[c].iter_mut() {
            *v /= piv;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                if f != 0.0 {
                    for k in 0..2 * n {
                        m[r][k] -= f * m[c][k];
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

pub fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

// ---- tree geometry -----------------------------------------------------

pub fn ancestors(t: &UltrametricTree, mut u: usize) -> Vec<usize> {
    let mut out = vec![u];
    while let Some(p) = t.parent(u) {
        out.push(p);
        u = p;
    }
    out
}

/// Most recent common ancestor by walking both root paths.
pub fn mrca(t: &UltrametricTree, a: usize, b: usize) -> usize {
    let pa = ancestors(t, a);
    *ancestors(t, b).iter().find(|x| pa.contains(x)).unwrap()
}

/// Covariance of nodes `a` and `b` under unit-rate Brownian motion.
pub fn bm_cov(t: &UltrametricTree, a: usize, b: usize) -> f64 {
    t.depth(mrca(t, a, b))
}

pub fn leaf_cov(t: &UltrametricTree, leaves: &[usize]) -> Vec<Vec<f64>> {
    leaves.iter().map(|&a| leaves.iter().map(|&b| bm_cov(t, a, b)).collect()).collect()
}

/// Generalized least squares root state.
pub fn gls_mean(t: &UltrametricTree, y: &[f64]) -> f64 {
    let leaves: Vec<usize> = (0..y.len()).collect();
    let ci = inverse(&leaf_cov(t, &leaves));
    let ones = vec![1.0; y.len()];
    dot(&ones, &mat_vec(&ci, y)) / dot(&ones, &mat_vec(&ci, &ones))
}

/// `E[node | leaves]` by conditioning the joint Gaussian directly.
pub fn conditional_mean(t: &UltrametricTree, mu: f64, node: usize, observed: &[usize], y: &[f64]) -> f64 {
    let ci = inverse(&leaf_cov(t, observed));
    let cross: Vec<f64> = observed.iter().map(|&i| bm_cov(t, node, i)).collect();
    let resid: Vec<f64> = observed.iter().map(|&i| y[i] - mu).collect();
    mu + dot(&cross, &mat_vec(&ci, &resid))
}

/// Leave-one-out prediction of each leaf from the others.
pub fn block_loo(t: &UltrametricTree, y: &[f64]) -> Vec<f64> {
    let mu = gls_mean(t, y);
    (0..y.len())
        .map(|i| {
            let others: Vec<usize> = (0..y.len()).filter(|&k| k != i).collect();
            conditional_mean(t, mu, i, &others, y)
        })
        .collect()
}

/// Conditional means of every node given all leaves.
pub fn augmented_asr(t: &UltrametricTree, y: &[f64]) -> Vec<f64> {
    let mu = gls_mean(t, y);
    let leaves: Vec<usize> = (0..y.len()).collect();
    (0..t.n_nodes()).map(|u| conditional_mean(t, mu, u, &leaves, y)).collect()
}

// ---- discrete characters -----------------------------------------------

/// `exp(Q t)` for the equal-rates generator, by scaling and squaring a
/// truncated Taylor series.
pub fn transition_matrix(k: usize, q: f64, t: f64) -> Vec<Vec<f64>> {
    let gen: Vec<Vec<f64>> =
        (0..k).map(|i| (0..k).map(|j| if i == j { -(k as f64 - 1.0) * q } else { q }).collect()).collect();
    let norm = (k as f64 - 1.0) * q * t * 2.0;
    let mut s = 0;
    while norm / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let scale = t / 2f64.powi(s);
    let a: Vec<Vec<f64>> = gen.iter().map(|r| r.iter().map(|v| v * scale).collect()).collect();
    let mut result: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let mut term = result.clone();
    for n in 1..30 {
        term = mat_mul(&term, &a).into_iter().map(|r| r.into_iter().map(|v| v / n as f64).collect()).collect();
        for i in 0..k {
            for j in 0..k {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..s {
        result = mat_mul(&result, &result);
    }
    result
}

pub fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    (0..n).map(|i| (0..p).map(|j| (0..m).map(|l| a[i][l] * b[l][j]).sum()).collect()).collect()
}

/// Calls `visit(states, weight)` for every full state assignment consistent
/// with the observed leaves, where `weight` is its joint probability under
/// a uniform root.
fn enumerate(t: &UltrametricTree, labels: &[Option<usize>], k: usize, q: f64, mut visit: impl FnMut(&[usize], f64)) {
    let n_nodes = t.n_nodes();
    let p: Vec<Vec<Vec<f64>>> =
        (0..n_nodes).map(|u| if t.parent(u).is_some() { transition_matrix(k, q, t.edge_length(u)) } else { vec![] }).collect();
    let free: Vec<usize> = (0..n_nodes).filter(|&u| u >= labels.len() || labels[u].is_none()).collect();
    let mut states: Vec<usize> = (0..n_nodes).map(|u| if u < labels.len() { labels[u].unwrap_or(0) } else { 0 }).collect();
    let total = k.pow(free.len() as u32);
    for code in 0..total {
        let mut c = code;
        for &u in &free {
            states[u] = c % k;
            c /= k;
        }
        let mut w = 1.0 / k as f64;
        for u in 0..n_nodes {
            if let Some(par) = t.parent(u) {
                w *= p[u][states[par]][states[u]];
            }
        }
        visit(&states, w);
    }
}

pub fn enumerated_loglik(t: &UltrametricTree, labels: &[Option<usize>], k: usize, q: f64) -> f64 {
    let mut total = 0.0;
    enumerate(t, labels, k, q, |_, w| total += w);
    total.ln()
}

/// Posterior state distribution at each node by Bayes' rule over all
/// assignments.
pub fn enumerated_posteriors(t: &UltrametricTree, labels: &[Option<usize>], k: usize, q: f64) -> Vec<Vec<f64>> {
    let mut acc = vec![vec![0.0; k]; t.n_nodes()];
    let mut total = 0.0;
    enumerate(t, labels, k, q, |s, w| {
        total += w;
        for (u, &a) in s.iter().enumerate() {
            acc[u][a] += w;
        }
    });
    acc.into_iter().map(|r| r.into_iter().map(|v| v / total).collect()).collect()
}

// ---- clustering ----------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NaiveLinkage {
    Single,
    Complete,
    Average,
    McQuitty,
    /// Ward on squared distances, reported as the raw criterion.
    WardSquared,
    /// Ward reported on the distance scale.
    WardEuclidean,
    Centroid,
    Median,
}

/// Merge record: the two leaf sets joined and the merge height.
pub type NaiveMerge = (Vec<usize>, Vec<usize>, f64);

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Agglomeration from definitions: set distances computed from members
/// or from cluster centers, never through an update formula.
pub fn naive_agglomerate(points: &[Vec<f64>], how: NaiveLinkage) -> Vec<NaiveMerge> {
    let n = points.len();
    let dist = |a: usize, b: usize| sq(&points[a], &points[b]).sqrt();
    struct Cluster {
        members: Vec<usize>,
        center: Vec<f64>,
        id: usize,
    }
    let mut clusters: Vec<Cluster> =
        (0..n).map(|i| Cluster { members: vec![i], center: points[i].clone(), id: i }).collect();
    // McQuitty distances are defined on the merge history itself.
    let mut mcq = std::collections::HashMap::new();
    for a in 0..n {
        for b in 0..n {
            mcq.insert((a, b), dist(a, b));
        }
    }
    let mut next_id = n;
    let mut out = Vec::new();
    while clusters.len() > 1 {
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let (ca, cb) = (&clusters[a], &clusters[b]);
                let pair = || ca.members.iter().flat_map(|&i| cb.members.iter().map(move |&j| (i, j)));
                let (na, nb) = (ca.members.len() as f64, cb.members.len() as f64);
                let v = match how {
                    NaiveLinkage::Single => pair().map(|(i, j)| dist(i, j)).fold(f64::INFINITY, f64::min),
                    NaiveLinkage::Complete => pair().map(|(i, j)| dist(i, j)).fold(0.0, f64::max),
                    NaiveLinkage::Average => pair().map(|(i, j)| dist(i, j)).sum::<f64>() / (na * nb),
                    NaiveLinkage::McQuitty => mcq[&(ca.id, cb.id)],
                    NaiveLinkage::WardSquared => 2.0 * na * nb / (na + nb) * sq(&ca.center, &cb.center),
                    NaiveLinkage::WardEuclidean => (2.0 * na * nb / (na + nb) * sq(&ca.center, &cb.center)).sqrt(),
                    NaiveLinkage::Centroid | NaiveLinkage::Median => sq(&ca.center, &cb.center),
                };
                if v < best.0 {
                    best = (v, a, b);
                }
            }
        }
        let (h, a, b) = best;
        let cb = clusters.remove(b);
        let ca = clusters.remove(a);
        let (na, nb) = (ca.members.len() as f64, cb.members.len() as f64);
        let center: Vec<f64> = match how {
            NaiveLinkage::Median => ca.center.iter().zip(&cb.center).map(|(x, y)| 0.5 * (x + y)).collect(),
            _ => ca.center.iter().zip(&cb.center).map(|(x, y)| (na * x + nb * y) / (na + nb)).collect(),
        };
        for c in &clusters {
            let v = 0.5 * (mcq[&(ca.id, c.id)] + mcq[&(cb.id, c.id)]);
            mcq.insert((next_id, c.id), v);
            mcq.insert((c.id, next_id), v);
        }
        let mut members = ca.members.clone();
        members.extend(&cb.members);
        out.push((ca.members, cb.members, h));
        clusters.push(Cluster { members, center, id: next_id });
        next_id += 1;
    }
    out
}

/// Merges of a dendrogram as leaf sets.
pub fn merges_as_sets(d: &Dendrogram) -> Vec<NaiveMerge> {
    let sets = d.descendant_leaves();
    d.merges().iter().map(|m| (sets[m.left].clone(), sets[m.right].clone(), m.height)).collect()
}

/// Compares merge sequences up to child order and member order.
pub fn same_merges(a: &[NaiveMerge], b: &[NaiveMerge], tol: f64) -> Result<(), String> {
    if a.len() != b.len() {
        return Err(format!("{} vs {} merges", a.len(), b.len()));
    }
    let norm = |(x, y, _): &NaiveMerge| {
        let mut x = x.clone();
        let mut y = y.clone();
        x.sort_unstable();
        y.sort_unstable();
        if x > y {
            (y, x)
        } else {
            (x, y)
        }
    };
    for (k, (ma, mb)) in a.iter().zip(b).enumerate() {
        if norm(ma) != norm(mb) {
            return Err(format!("merge {k}: {:?} vs {:?}", norm(ma), norm(mb)));
        }
        if (ma.2 - mb.2).abs() > tol * (1.0 + ma.2.abs()) {
            return Err(format!("merge {k}: height {} vs {}", ma.2, mb.2));
        }
    }
    Ok(())
}

// ---- comparison metrics ------------------------------------------------

/// Cophenetic distance: height of the first merge joining both leaves.
pub fn brute_cophenetic(d: &Dendrogram, i: usize, j: usize) -> f64 {
    for (a, b, h) in merges_as_sets(d) {
        if (a.contains(&i) && b.contains(&j)) || (a.contains(&j) && b.contains(&i)) {
            return h;
        }
    }
    unreachable!()
}

/// Pearson correlation via sums of products, single pass.
pub fn raw_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

pub fn direct_coph(dm: &[Vec<f64>], d: &Dendrogram) -> f64 {
    let n = dm.len();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for i in 0..n {
        for j in i + 1..n {
            a.push(dm[i][j]);
            b.push(brute_cophenetic(d, i, j));
        }
    }
    raw_pearson(&a, &b)
}

/// Adjusted Rand index from pair counts over all `n(n-1)/2` pairs.
pub fn pair_count_ari(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut both, mut only_a, mut only_b, mut neither) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => both += 1.0,
                (true, false) => only_a += 1.0,
                (false, true) => only_b += 1.0,
                (false, false) => neither += 1.0,
            }
        }
    }
    let total = both + only_a + only_b + neither;
    let expected = (both + only_a) * (both + only_b) / total;
    let max = 0.5 * ((both + only_a) + (both + only_b));
    (both - expected) / (max - expected)
}

/// Spearman correlation for distinct values: `1 - 6 Σ d² / (n (n² - 1))`.
pub fn rank_difference_spearman(a: &[f64], b: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> {
        v.iter().map(|x| v.iter().filter(|y| *y < x).count() as f64 + 1.0).collect()
    };
    let (ra, rb) = (rank(a), rank(b));
    let n = a.len() as f64;
    let d2: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - y) * (x - y)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

/// Within-cluster root-mean-square deviation: cluster means first, then
/// deviations.
pub fn two_pass_rms(v: &[f64], assignment: &[usize]) -> f64 {
    let k = assignment.iter().max().unwrap() + 1;
    let means: Vec<f64> = (0..k)
        .map(|c| {
            let members: Vec<f64> = v.iter().zip(assignment).filter(|(_, &a)| a == c).map(|(x, _)| *x).collect();
            members.iter().sum::<f64>() / members.len() as f64
        })
        .collect();
    (v.iter().zip(assignment).map(|(x, &c)| (x - means[c]).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}
