//! Comparison metrics: cophenetic correlation, adjusted Rand index, the F1
//! gold standard and rank correlation.

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use serde::{Deserialize, Serialize};

use crate::clustering::DistanceMatrix;
use crate::error::{Error, Result};
use crate::tree::{Dendrogram, Partition};

/// Pearson correlation; errors when either input has no spread.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!("lengths {} and {} differ", a.len(), b.len())));
    }
    if a.len() < 2 {
        return Err(Error::InvalidInput("need at least 2 pairs".into()));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::Degenerate("zero variance in correlation input".into()));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson correlation between input distances and cophenetic distances over
/// all pairs of instances.
pub fn cophenetic_correlation(dm: &DistanceMatrix, d: &Dendrogram) -> Result<f64> {
    let n = dm.n();
    if n < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 instances, got {n}")));
    }
    if d.n_leaves() != n {
        return Err(Error::InvalidInput("dendrogram and distance matrix sizes differ".into()));
    }
    let coph = d.cophenetic_matrix();
    let mut c = Vec::with_capacity(n * (n - 1) / 2);
    for (i, row) in coph.iter().enumerate() {
        c.extend_from_slice(&row[i + 1..]);
    }
    pearson(&dm.upper_triangle(), &c)
}

/// Maps arbitrary labels to dense codes `0..k` in order of first appearance.
fn dense_codes(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = std::collections::BTreeMap::new();
    for &l in labels {
        let next = map.len();
        map.entry(l).or_insert(next);
    }
    (labels.iter().map(|l| map[l]).collect(), map.len())
}

fn contingency(a: &[usize], b: &[usize]) -> (Vec<Vec<u64>>, usize, usize) {
    let (ca, ka) = dense_codes(a);
    let (cb, kb) = dense_codes(b);
    let mut table = vec![vec![0u64; kb]; ka];
    for (x, y) in ca.iter().zip(&cb) {
        table[*x][*y] += 1;
    }
    (table, ka, kb)
}

fn pairs(n: u64) -> f64 {
    (n * n.saturating_sub(1) / 2) as f64
}

/// Adjusted Rand index between two labelings of the same instances.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!("lengths {} and {} differ", a.len(), b.len())));
    }
    let n = a.len() as u64;
    let (table, _, _) = contingency(a, b);
    let index: f64 = table.iter().flatten().map(|&c| pairs(c)).sum();
    let row_sums: f64 = table.iter().map(|r| pairs(r.iter().sum())).sum();
    let col_sums: f64 = (0..table.first().map_or(0, Vec::len))
        .map(|j| pairs(table.iter().map(|r| r[j]).sum()))
        .sum();
    let total = pairs(n);
    let expected = if total > 0.0 { row_sums * col_sums / total } else { 0.0 };
    let max_index = 0.5 * (row_sums + col_sums);
    let denom = max_index - expected;
    if denom == 0.0 {
        // Both labelings trivial (one cluster or all singletons) and equal.
        return Ok(if index == max_index { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / denom)
}

/// Adjusted Rand index of a partition against reference labels.
pub fn ari(p: &Partition, labels: &[usize]) -> Result<f64> {
    adjusted_rand_index(&p.assignment, labels)
}

/// How clusters are mapped to labels in [`f1_gold`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelAssignment {
    /// Each cluster takes its most frequent label.
    #[default]
    Majority,
    /// One-to-one matching that maximizes correctly labeled instances.
    Hungarian,
}

/// Macro-averaged F1 of the dendrogram used as a classifier: cut into as
/// many clusters as there are labels, give each cluster a label, score.
pub fn f1_gold(d: &Dendrogram, labels: &[usize], assignment: LabelAssignment) -> Result<f64> {
    let n = d.n_leaves();
    if labels.len() != n {
        return Err(Error::InvalidInput(format!("{} labels for {} leaves", labels.len(), n)));
    }
    let (truth, k) = dense_codes(labels);
    if k < 2 {
        return Err(Error::InvalidInput("F1 gold standard needs at least 2 distinct labels".into()));
    }
    let part = d.cut(k)?;
    let mut counts = vec![vec![0i64; k]; k];
    for (c, t) in part.assignment.iter().zip(&truth) {
        counts[*c][*t] += 1;
    }
    let cluster_label: Vec<usize> = match assignment {
        LabelAssignment::Majority => counts
            .iter()
            .map(|row| {
                let mut best = 0;
                for (l, &c) in row.iter().enumerate() {
                    if c > row[best] {
                        best = l;
                    }
                }
                best
            })
            .collect(),
        LabelAssignment::Hungarian => {
            let weights = Matrix::from_rows(counts.clone()).expect("square count table");
            kuhn_munkres(&weights).1
        }
    };
    let predicted: Vec<usize> = part.assignment.iter().map(|&c| cluster_label[c]).collect();
    Ok(macro_f1(&truth, &predicted, k))
}

/// Macro F1 over classes `0..k`; classes never predicted score 0.
pub fn macro_f1(truth: &[usize], predicted: &[usize], k: usize) -> f64 {
    let mut tp = vec![0usize; k];
    let mut pred = vec![0usize; k];
    let mut actual = vec![0usize; k];
    for (&t, &p) in truth.iter().zip(predicted) {
        actual[t] += 1;
        pred[p] += 1;
        if t == p {
            tp[t] += 1;
        }
    }
    let total: f64 = (0..k)
        .map(|c| {
            let denom = pred[c] + actual[c];
            if denom == 0 {
                0.0
            } else {
                2.0 * tp[c] as f64 / denom as f64
            }
        })
        .sum();
    total / k as f64
}

/// Average ranks (1-based), ties sharing their mean rank.
pub fn midranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start;
        while end + 1 < idx.len() && v[idx[end + 1]] == v[idx[start]] {
            end += 1;
        }
        let rank = (start + end) as f64 / 2.0 + 1.0;
        for &i in &idx[start..=end] {
            ranks[i] = rank;
        }
        start = end + 1;
    }
    ranks
}

/// Spearman rank correlation (Pearson on midranks).
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!("lengths {} and {} differ", a.len(), b.len())));
    }
    if a.len() < 3 {
        return Err(Error::InvalidInput("Spearman correlation needs at least 3 pairs".into()));
    }
    pearson(&midranks(a), &midranks(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::Merge;
    use approx::assert_relative_eq;

    #[test]
    fn ari_identical_and_trivial() {
        let l = [0, 0, 1, 1, 2, 2];
        assert_eq!(adjusted_rand_index(&l, &l).unwrap(), 1.0);
        assert_eq!(adjusted_rand_index(&[5, 5, 7, 7, 9, 9], &l).unwrap(), 1.0);
        assert_eq!(adjusted_rand_index(&[0; 6], &l).unwrap(), 0.0);
        assert_eq!(adjusted_rand_index(&[0; 6], &[1; 6]).unwrap(), 1.0);
    }

    #[test]
    fn ari_crossed_pairs() {
        // Pair enumeration for {1,1,2,2} vs {1,2,1,2}: no pair agrees on
        // "together", index 0, expected (2*2)/6, max 2, so ARI = -0.5.
        assert_relative_eq!(adjusted_rand_index(&[1, 1, 2, 2], &[1, 2, 1, 2]).unwrap(), -0.5, epsilon = 1e-15);
    }

    #[test]
    fn spearman_examples() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_relative_eq!(spearman(&a, &a).unwrap(), 1.0, epsilon = 1e-15);
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        assert_relative_eq!(spearman(&a, &neg).unwrap(), -1.0, epsilon = 1e-15);
        // 1 - 6 * (0 + 1 + 1 + 0) / (4 * 15) = 0.8
        assert_relative_eq!(spearman(&a, &[1.0, 3.0, 2.0, 4.0]).unwrap(), 0.8, epsilon = 1e-15);
        assert!(spearman(&a, &[1.0; 4]).is_err());
        assert!(spearman(&a[..2], &a[..2]).is_err());
    }

    #[test]
    fn midranks_average_ties() {
        assert_eq!(midranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    fn two_cherries() -> Dendrogram {
        // ((0,1,2),(3,4,5)) as a caterpillar within each side.
        Dendrogram::unlabeled(
            6,
            vec![
                Merge { left: 0, right: 1, height: 1.0 },
                Merge { left: 6, right: 2, height: 2.0 },
                Merge { left: 3, right: 4, height: 1.0 },
                Merge { left: 8, right: 5, height: 2.0 },
                Merge { left: 7, right: 9, height: 5.0 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn f1_perfect_and_one_misplaced() {
        let d = two_cherries();
        assert_eq!(f1_gold(&d, &[0, 0, 0, 1, 1, 1], LabelAssignment::Majority).unwrap(), 1.0);
        // Instance 2 carries label 1 but sits with the 0s. Confusion:
        // class 0: tp 2, predicted 3, actual 2 -> F1 = 4/5
        // class 1: tp 3, predicted 3, actual 4 -> F1 = 6/7
        let f1 = f1_gold(&d, &[0, 0, 1, 1, 1, 1], LabelAssignment::Majority).unwrap();
        assert_relative_eq!(f1, 0.5 * (0.8 + 6.0 / 7.0), epsilon = 1e-15);
        let h = f1_gold(&d, &[0, 0, 1, 1, 1, 1], LabelAssignment::Hungarian).unwrap();
        assert_relative_eq!(h, f1, epsilon = 1e-15);
        assert!(f1_gold(&d, &[3; 6], LabelAssignment::Majority).is_err());
    }

    #[test]
    fn majority_can_leave_a_class_unpredicted() {
        let d = two_cherries();
        // Both clusters are majority label 0; class 1 is never predicted.
        let labels = [0, 0, 1, 0, 0, 1];
        let f1 = f1_gold(&d, &labels, LabelAssignment::Majority).unwrap();
        assert_relative_eq!(f1, 0.5 * (2.0 * 4.0 / (6.0 + 4.0)), epsilon = 1e-15);
        let h = f1_gold(&d, &labels, LabelAssignment::Hungarian).unwrap();
        assert!(h > 0.0);
    }

    #[test]
    fn cophenetic_correlation_of_its_own_distances() {
        let d = two_cherries();
        let dm = DistanceMatrix::from_square(&d.cophenetic_matrix()).unwrap();
        assert_relative_eq!(cophenetic_correlation(&dm, &d).unwrap(), 1.0, epsilon = 1e-15);
        let scaled: Vec<Vec<f64>> = d
            .cophenetic_matrix()
            .iter()
            .enumerate()
            .map(|(i, r)| r.iter().enumerate().map(|(j, v)| if i == j { 0.0 } else { 3.0 * v + 2.0 }).collect())
            .collect();
        let dm = DistanceMatrix::from_square(&scaled).unwrap();
        assert_relative_eq!(cophenetic_correlation(&dm, &d).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn cophenetic_correlation_needs_spread() {
        let d = Dendrogram::unlabeled(
            3,
            vec![Merge { left: 0, right: 1, height: 1.0 }, Merge { left: 3, right: 2, height: 1.0 }],
        )
        .unwrap();
        let dm = DistanceMatrix::from_square(&[vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 2.0], vec![2.0, 2.0, 0.0]]).unwrap();
        assert!(matches!(cophenetic_correlation(&dm, &d), Err(Error::Degenerate(_))));
    }
}
