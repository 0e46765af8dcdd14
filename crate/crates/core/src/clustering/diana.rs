//! Divisive analysis (DIANA).

use super::DistanceMatrix;
use crate::error::{Error, Result};
use crate::tree::{Dendrogram, Merge};

struct Split {
    height: f64,
    level: usize,
    // Children as either a leaf id or an index into the split list.
    children: [Child; 2],
}

#[derive(Clone, Copy)]
enum Child {
    Leaf(usize),
    Split(usize),
}

/// Top-down clustering: each cluster is split by growing a splinter group
/// from its most dissimilar member. A node's height is the diameter of the
/// cluster it represents.
pub fn diana(dm: &DistanceMatrix) -> Result<Dendrogram> {
    let n = dm.n();
    if n < 2 {
        return Err(Error::InvalidInput(format!("DIANA needs at least 2 objects, got {n}")));
    }
    let mut splits: Vec<Split> = Vec::with_capacity(n - 1);
    let all: Vec<usize> = (0..n).collect();
    divide(dm, all, 0, &mut splits);

    // Emit merges bottom-up: ascending height, deeper splits first on ties,
    // so that every child precedes its parent.
    let mut order: Vec<usize> = (0..splits.len()).collect();
    order.sort_by(|&a, &b| {
        splits[a]
            .height
            .total_cmp(&splits[b].height)
            .then(splits[b].level.cmp(&splits[a].level))
            .then(a.cmp(&b))
    });
    let mut node_of = vec![0usize; splits.len()];
    for (m, &s) in order.iter().enumerate() {
        node_of[s] = n + m;
    }
    let id = |c: Child| match c {
        Child::Leaf(i) => i,
        Child::Split(s) => node_of[s],
    };
    let merges = order
        .iter()
        .map(|&s| Merge {
            left: id(splits[s].children[0]),
            right: id(splits[s].children[1]),
            height: splits[s].height,
        })
        .collect();
    Dendrogram::unlabeled(n, merges)
}

fn divide(dm: &DistanceMatrix, members: Vec<usize>, level: usize, splits: &mut Vec<Split>) -> Child {
    if members.len() == 1 {
        return Child::Leaf(members[0]);
    }
    let diameter = members
        .iter()
        .flat_map(|&a| members.iter().map(move |&b| (a, b)))
        .map(|(a, b)| dm.get(a, b))
        .fold(0.0, f64::max);
    let (remainder, splinter) = splinter(dm, &members);
    // The group holding the smallest object index goes left.
    let (first, second) = if splinter[0] < remainder[0] { (splinter, remainder) } else { (remainder, splinter) };

    let idx = splits.len();
    splits.push(Split { height: diameter, level, children: [Child::Leaf(0), Child::Leaf(0)] });
    let left = divide(dm, first, level + 1, splits);
    let right = divide(dm, second, level + 1, splits);
    splits[idx].children = [left, right];
    Child::Split(idx)
}

fn mean_to(dm: &DistanceMatrix, x: usize, group: &[usize]) -> f64 {
    let (sum, count) = group
        .iter()
        .filter(|&&g| g != x)
        .fold((0.0, 0usize), |(s, c), &g| (s + dm.get(x, g), c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Returns `(remainder, splinter)`, both in ascending object order.
fn splinter(dm: &DistanceMatrix, members: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut seed = members[0];
    let mut best = f64::NEG_INFINITY;
    for &m in members {
        let a = mean_to(dm, m, members);
        if a > best {
            best = a;
            seed = m;
        }
    }
    let mut splinter = vec![seed];
    let mut rest: Vec<usize> = members.iter().copied().filter(|&m| m != seed).collect();
    while rest.len() > 1 {
        let mut mover = None;
        let mut best_gain = 0.0;
        for (pos, &r) in rest.iter().enumerate() {
            let gain = mean_to(dm, r, &rest) - mean_to(dm, r, &splinter);
            if gain > best_gain {
                best_gain = gain;
                mover = Some(pos);
            }
        }
        match mover {
            Some(pos) => splinter.push(rest.remove(pos)),
            None => break,
        }
    }
    splinter.sort_unstable();
    (rest, splinter)
}
