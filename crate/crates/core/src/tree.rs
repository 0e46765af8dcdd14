//! Dendrogram representation, edge lengths, cophenetic distances and cuts.
//!
//! Node ids follow the usual merge-sequence layout: leaves are `0..n` and the
//! internal node created by merge `m` is `n + m`. The root is the last merge.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default clamp for zero or negative edge lengths.
pub const EDGE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
}

/// A rooted binary tree over `n` leaves encoded as `n - 1` merges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    n_leaves: usize,
    merges: Vec<Merge>,
    leaf_labels: Vec<String>,
}

impl Dendrogram {
    pub fn new(n_leaves: usize, merges: Vec<Merge>, leaf_labels: Vec<String>) -> Result<Self> {
        if n_leaves == 0 {
            return Err(Error::InvalidDendrogram("no leaves".into()));
        }
        if merges.len() + 1 != n_leaves {
            return Err(Error::InvalidDendrogram(format!(
                "{} merges for {} leaves",
                merges.len(),
                n_leaves
            )));
        }
        if leaf_labels.len() != n_leaves {
            return Err(Error::InvalidDendrogram("label count does not match leaves".into()));
        }
        let mut used = vec![false; 2 * n_leaves - 1];
        for (m, merge) in merges.iter().enumerate() {
            if !(merge.height.is_finite() && merge.height >= 0.0) {
                return Err(Error::InvalidDendrogram(format!("merge {m} has height {}", merge.height)));
            }
            for child in [merge.left, merge.right] {
                if child >= n_leaves + m {
                    return Err(Error::InvalidDendrogram(format!(
                        "merge {m} references node {child} that does not exist yet"
                    )));
                }
                if used[child] {
                    return Err(Error::InvalidDendrogram(format!("node {child} merged twice")));
                }
                used[child] = true;
            }
            if merge.left == merge.right {
                return Err(Error::InvalidDendrogram(format!("merge {m} joins a node with itself")));
            }
        }
        Ok(Dendrogram { n_leaves, merges, leaf_labels })
    }

    /// Same as [`Dendrogram::new`] with labels `"1".."n"`.
    pub fn unlabeled(n_leaves: usize, merges: Vec<Merge>) -> Result<Self> {
        Self::new(n_leaves, merges, (1..=n_leaves).map(|i| i.to_string()).collect())
    }

    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn n_nodes(&self) -> usize {
        2 * self.n_leaves - 1
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn leaf_labels(&self) -> &[String] {
        &self.leaf_labels
    }

    pub fn root(&self) -> usize {
        self.n_nodes() - 1
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        node < self.n_leaves
    }

    pub fn children(&self, node: usize) -> Option<(usize, usize)> {
        if self.is_leaf(node) {
            None
        } else {
            let m = self.merges[node - self.n_leaves];
            Some((m.left, m.right))
        }
    }

    /// Merge height of an internal node; 0 for leaves.
    pub fn height(&self, node: usize) -> f64 {
        if self.is_leaf(node) {
            0.0
        } else {
            self.merges[node - self.n_leaves].height
        }
    }

    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.n_nodes()];
        for (m, merge) in self.merges.iter().enumerate() {
            parent[merge.left] = Some(self.n_leaves + m);
            parent[merge.right] = Some(self.n_leaves + m);
        }
        parent
    }

    /// Leaves in left-to-right drawing order.
    pub fn leaf_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.n_leaves);
        let mut stack = vec![self.root()];
        while let Some(u) = stack.pop() {
            match self.children(u) {
                None => order.push(u),
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
            }
        }
        order
    }

    /// Leaf sets below every node, indexed by node id.
    pub fn descendant_leaves(&self) -> Vec<Vec<usize>> {
        let mut sets: Vec<Vec<usize>> = (0..self.n_leaves).map(|i| vec![i]).collect();
        for merge in &self.merges {
            let mut s = sets[merge.left].clone();
            s.extend_from_slice(&sets[merge.right]);
            sets.push(s);
        }
        sets
    }

    /// Replaces leaf labels, e.g. after building from anonymous rows.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_leaves {
            return Err(Error::InvalidDendrogram("label count does not match leaves".into()));
        }
        self.leaf_labels = labels;
        Ok(self)
    }

    /// Converts merge heights into edge lengths with every leaf at the root
    /// height. Edges that would be shorter than `eps` (ties or height
    /// inversions) are set to `eps`; the nodes below an inverted edge are
    /// placed `eps` under their parent.
    pub fn to_ultrametric(&self, eps: f64) -> Result<UltrametricTree> {
        if self.merges.is_empty() {
            return Err(Error::DegenerateTree("empty dendrogram".into()));
        }
        assert!(eps > 0.0, "eps must be positive");
        let n_nodes = self.n_nodes();
        let parent = self.parents();
        let root = self.root();
        let mut eff = vec![0.0; n_nodes];
        let mut edge_length = vec![0.0; n_nodes];
        let mut node_depth = vec![0.0; n_nodes];
        eff[root] = self.height(root);
        // Parents always have larger ids, so a descending sweep is top-down.
        for u in (0..root).rev() {
            let p = parent[u].expect("non-root node has a parent");
            if self.is_leaf(u) {
                edge_length[u] = eff[p].max(eps);
            } else {
                eff[u] = self.height(u).min(eff[p] - eps);
                edge_length[u] = eff[p] - eff[u];
            }
            node_depth[u] = node_depth[p] + edge_length[u];
        }
        let children = (0..n_nodes).map(|u| self.children(u)).collect();
        Ok(UltrametricTree {
            n_leaves: self.n_leaves,
            parent,
            children,
            edge_length,
            node_depth,
            tree_height: self.height(root),
        })
    }

    /// Pairwise merge height of the most recent common ancestor.
    pub fn cophenetic_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.n_leaves;
        let mut out = vec![vec![0.0; n]; n];
        let sets = self.descendant_leaves();
        for merge in &self.merges {
            for &i in &sets[merge.left] {
                for &j in &sets[merge.right] {
                    out[i][j] = merge.height;
                    out[j][i] = merge.height;
                }
            }
        }
        out
    }

    /// Cuts the tree into `k` clusters by undoing the last `k - 1` merges.
    /// Cluster ids are assigned in order of each cluster's smallest leaf.
    pub fn cut(&self, k: usize) -> Result<Partition> {
        let n = self.n_leaves;
        if k == 0 || k > n {
            return Err(Error::KOutOfRange { k, n });
        }
        // Union the first n - k merges.
        let mut rep: Vec<usize> = (0..n).collect();
        let mut node_rep: Vec<usize> = (0..n).collect();
        for merge in &self.merges[..n - k] {
            let a = find(&mut rep, node_rep[merge.left]);
            let b = find(&mut rep, node_rep[merge.right]);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            rep[hi] = lo;
            node_rep.push(lo);
        }
        let mut id_of_root = vec![usize::MAX; n];
        let mut next = 0;
        let mut assignment = Vec::with_capacity(n);
        for i in 0..n {
            let r = find(&mut rep, i);
            if id_of_root[r] == usize::MAX {
                id_of_root[r] = next;
                next += 1;
            }
            assignment.push(id_of_root[r]);
        }
        Ok(Partition { assignment, k })
    }
}

fn find(rep: &mut [usize], mut x: usize) -> usize {
    while rep[x] != x {
        rep[x] = rep[rep[x]];
        x = rep[x];
    }
    x
}

/// Edge-length view of a dendrogram used by the evolutionary models.
#[derive(Debug, Clone, PartialEq)]
pub struct UltrametricTree {
    n_leaves: usize,
    parent: Vec<Option<usize>>,
    children: Vec<Option<(usize, usize)>>,
    edge_length: Vec<f64>,
    node_depth: Vec<f64>,
    tree_height: f64,
}

impl UltrametricTree {
    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn n_nodes(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        self.n_nodes() - 1
    }

    pub fn parent(&self, u: usize) -> Option<usize> {
        self.parent[u]
    }

    pub fn children(&self, u: usize) -> Option<(usize, usize)> {
        self.children[u]
    }

    pub fn edge_length(&self, u: usize) -> f64 {
        self.edge_length[u]
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_length
    }

    pub fn depth(&self, u: usize) -> f64 {
        self.node_depth[u]
    }

    pub fn depths(&self) -> &[f64] {
        &self.node_depth
    }

    pub fn tree_height(&self) -> f64 {
        self.tree_height
    }

    /// Nodes ordered children-before-parents (ascending id).
    pub fn postorder(&self) -> impl DoubleEndedIterator<Item = usize> {
        0..self.n_nodes()
    }

    /// Leaf covariance under unit-rate Brownian motion: the depth of the
    /// most recent common ancestor of each pair.
    pub fn shared_depth_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.n_leaves;
        let mut out = vec![vec![0.0; n]; n];
        let mut sets: Vec<Vec<usize>> = Vec::with_capacity(self.n_nodes());
        for u in self.postorder() {
            match self.children[u] {
                None => {
                    out[u][u] = self.node_depth[u];
                    sets.push(vec![u]);
                }
                Some((l, r)) => {
                    let d = self.node_depth[u];
                    for &i in &sets[l] {
                        for &j in &sets[r] {
                            out[i][j] = d;
                            out[j][i] = d;
                        }
                    }
                    let mut s = std::mem::take(&mut sets[l]);
                    s.extend_from_slice(&sets[r]);
                    sets.push(s);
                }
            }
        }
        out
    }

    /// Newick string with leaf names from `labels`.
    pub fn to_newick(&self, labels: &[String]) -> String {
        let mut out = String::new();
        self.write_newick(self.root(), labels, &mut out);
        out.push(';');
        out
    }

    fn write_newick(&self, u: usize, labels: &[String], out: &mut String) {
        match self.children[u] {
            None => out.push_str(&newick_label(&labels[u])),
            Some((l, r)) => {
                out.push('(');
                self.write_newick(l, labels, out);
                out.push(',');
                self.write_newick(r, labels, out);
                out.push(')');
            }
        }
        if self.parent[u].is_some() {
            out.push(':');
            out.push_str(&format_sig(self.edge_length[u], 12));
        }
    }
}

fn newick_label(label: &str) -> String {
    let needs_quotes = label.chars().any(|c| c.is_whitespace() || "(),:;[]'".contains(c));
    if needs_quotes {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_string()
    }
}

/// Formats like C's `%.{digits}g`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exp = x.abs().log10().floor() as i32;
    if exp < -5 || exp >= digits as i32 {
        let s = format!("{:.*e}", digits - 1, x);
        let (mant, e) = s.split_once('e').unwrap();
        let mant = trim_zeros(mant);
        let e: i32 = e.parse().unwrap();
        format!("{mant}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A flat clustering of `n` instances into `k` non-empty clusters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub assignment: Vec<usize>,
    pub k: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_leaf() -> Dendrogram {
        Dendrogram::new(
            3,
            vec![
                Merge { left: 0, right: 1, height: 1.0 },
                Merge { left: 3, right: 2, height: 2.0 },
            ],
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap()
    }

    #[test]
    fn ultrametric_edges_from_heights() {
        let t = three_leaf().to_ultrametric(EDGE_EPS).unwrap();
        assert_eq!(t.edge_length(0), 1.0);
        assert_eq!(t.edge_length(1), 1.0);
        assert_eq!(t.edge_length(2), 2.0);
        assert_eq!(t.edge_length(3), 1.0);
        assert_eq!(t.tree_height(), 2.0);
        for leaf in 0..3 {
            assert_eq!(t.depth(leaf), 2.0);
        }
    }

    #[test]
    fn zero_height_merge_is_clamped() {
        let d = Dendrogram::unlabeled(2, vec![Merge { left: 0, right: 1, height: 0.0 }]).unwrap();
        let t = d.to_ultrametric(1e-9).unwrap();
        assert_eq!(t.edge_length(0), 1e-9);
        assert_eq!(t.edge_length(1), 1e-9);
    }

    #[test]
    fn single_leaf_is_degenerate() {
        let d = Dendrogram::unlabeled(1, vec![]).unwrap();
        assert!(matches!(d.to_ultrametric(1e-9), Err(Error::DegenerateTree(_))));
    }

    #[test]
    fn cophenetic_three_leaf() {
        let c = three_leaf().cophenetic_matrix();
        assert_eq!(c, vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 2.0], vec![2.0, 2.0, 0.0]]);
        let d = Dendrogram::unlabeled(2, vec![Merge { left: 0, right: 1, height: 0.7 }]).unwrap();
        assert_eq!(d.cophenetic_matrix(), vec![vec![0.0, 0.7], vec![0.7, 0.0]]);
    }

    #[test]
    fn cuts() {
        let d = three_leaf();
        assert_eq!(d.cut(1).unwrap().assignment, vec![0, 0, 0]);
        assert_eq!(d.cut(2).unwrap().assignment, vec![0, 0, 1]);
        assert_eq!(d.cut(3).unwrap().assignment, vec![0, 1, 2]);
        assert!(matches!(d.cut(0), Err(Error::KOutOfRange { .. })));
        assert!(matches!(d.cut(4), Err(Error::KOutOfRange { .. })));
    }

    #[test]
    fn rejects_bad_merges() {
        let dup = Dendrogram::unlabeled(
            3,
            vec![Merge { left: 0, right: 1, height: 1.0 }, Merge { left: 0, right: 2, height: 2.0 }],
        );
        assert!(dup.is_err());
        let forward = Dendrogram::unlabeled(
            3,
            vec![Merge { left: 0, right: 4, height: 1.0 }, Merge { left: 1, right: 2, height: 2.0 }],
        );
        assert!(forward.is_err());
        let negative = Dendrogram::unlabeled(2, vec![Merge { left: 0, right: 1, height: -1.0 }]);
        assert!(negative.is_err());
    }

    #[test]
    fn newick_format() {
        let d = three_leaf().with_labels(vec!["a".into(), "b c".into(), "d".into()]).unwrap();
        let t = d.to_ultrametric(EDGE_EPS).unwrap();
        assert_eq!(t.to_newick(d.leaf_labels()), "((a:1,'b c':1):1,d:2);");
    }

    #[test]
    fn sig_digits() {
        assert_eq!(format_sig(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(format_sig(2.0, 12), "2");
        assert_eq!(format_sig(1e-9, 12), "1e-09");
        assert_eq!(format_sig(123456.789, 12), "123456.789");
    }

    #[test]
    fn leaf_order_is_left_first() {
        let d = Dendrogram::unlabeled(
            3,
            vec![Merge { left: 2, right: 0, height: 1.0 }, Merge { left: 1, right: 3, height: 2.0 }],
        )
        .unwrap();
        assert_eq!(d.leaf_order(), vec![1, 2, 0]);
    }
}
