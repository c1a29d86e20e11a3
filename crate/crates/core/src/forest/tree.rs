//! CART-style binary decision tree grown with weighted Gini impurity.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::features::N_FEATURES;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    /// Class weight totals `[not annotated, annotated]` of the training rows
    /// that reached this leaf.
    Leaf { weights: [f64; 2] },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    /// Rebuilds a tree from its node array, checking that it is a well-formed
    /// tree rooted at node 0.
    pub fn from_nodes(nodes: Vec<Node>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::CorruptModel("tree without nodes".into()));
        }
        let mut parents = vec![0u32; nodes.len()];
        for (i, node) in nodes.iter().enumerate() {
            match *node {
                Node::Split { feature, threshold, left, right } => {
                    if feature >= N_FEATURES || !threshold.is_finite() {
                        return Err(Error::CorruptModel(alloc::format!("bad split at node {i}")));
                    }
                    for child in [left, right] {
                        if child <= i || child >= nodes.len() {
                            return Err(Error::CorruptModel(alloc::format!("bad child index at node {i}")));
                        }
                        parents[child] += 1;
                    }
                }
                Node::Leaf { weights } => {
                    if !(weights[0] >= 0.0 && weights[1] >= 0.0 && weights[0] + weights[1] > 0.0) {
                        return Err(Error::CorruptModel(alloc::format!("bad leaf at node {i}")));
                    }
                }
            }
        }
        if parents[0] != 0 || parents[1..].iter().any(|&p| p != 1) {
            return Err(Error::CorruptModel("node array is not a tree".into()));
        }
        Ok(DecisionTree { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_weights(&self, x: &[f64; N_FEATURES]) -> [f64; 2] {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { weights } => return weights,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    /// Fraction of annotated weight in the leaf reached by `x`.
    pub fn proba(&self, x: &[f64; N_FEATURES]) -> f64 {
        let w = self.leaf_weights(x);
        w[1] / (w[0] + w[1])
    }
}

pub(crate) struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub features_per_split: usize,
}

#[derive(Clone, Copy)]
struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// Sum of squared class weights over total weight; larger is purer.
fn purity(w: [f64; 2]) -> f64 {
    let total = w[0] + w[1];
    if total > 0.0 {
        (w[0] * w[0] + w[1] * w[1]) / total
    } else {
        0.0
    }
}

/// Grows a tree on the rows listed in `rows` (repeats allowed).
///
/// Returns the tree and the total weighted impurity decrease per feature.
pub(crate) fn grow<R: Rng>(
    x: &[[f64; N_FEATURES]],
    y: &[bool],
    mut rows: Vec<usize>,
    class_weight: [f64; 2],
    params: &GrowParams,
    rng: &mut R,
) -> (DecisionTree, [f64; N_FEATURES]) {
    let mut nodes = vec![Node::Leaf { weights: [0.0; 2] }];
    let mut importance = [0.0; N_FEATURES];
    let mut buf: Vec<(f64, bool)> = Vec::with_capacity(rows.len());
    let mut order: [usize; N_FEATURES] = core::array::from_fn(|i| i);
    // (node, start, end, depth)
    let mut stack = vec![(0usize, 0usize, rows.len(), 0usize)];

    while let Some((node, start, end, depth)) = stack.pop() {
        let members = &rows[start..end];
        let mut counts = [0usize; 2];
        for &r in members {
            counts[y[r] as usize] += 1;
        }
        let weights = [counts[0] as f64 * class_weight[0], counts[1] as f64 * class_weight[1]];
        nodes[node] = Node::Leaf { weights };

        let n = members.len();
        let pure = counts[0] == 0 || counts[1] == 0;
        let depth_capped = params.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_capped || n < 2 * params.min_samples_leaf {
            continue;
        }

        order.shuffle(rng);
        let mut best: Option<BestSplit> = None;
        let mut evaluated = 0;
        for &feature in &order {
            if evaluated == params.features_per_split {
                break;
            }
            buf.clear();
            buf.extend(members.iter().map(|&r| (x[r][feature], y[r])));
            let first = buf[0].0;
            if buf.iter().all(|v| v.0 == first) {
                // constant features do not count towards the per-node budget
                continue;
            }
            evaluated += 1;
            buf.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

            let mut left_counts = [0usize; 2];
            for k in 0..n - 1 {
                left_counts[buf[k].1 as usize] += 1;
                let (lo, hi) = (buf[k].0, buf[k + 1].0);
                if lo == hi {
                    continue;
                }
                let n_left = k + 1;
                if n_left < params.min_samples_leaf || n - n_left < params.min_samples_leaf {
                    continue;
                }
                let left = [left_counts[0] as f64 * class_weight[0], left_counts[1] as f64 * class_weight[1]];
                let right = [
                    (counts[0] - left_counts[0]) as f64 * class_weight[0],
                    (counts[1] - left_counts[1]) as f64 * class_weight[1],
                ];
                let score = purity(left) + purity(right);
                let mut threshold = lo + (hi - lo) / 2.0;
                if threshold >= hi {
                    threshold = lo;
                }
                let better = match best {
                    None => true,
                    Some(b) => {
                        score > b.score
                            || (score == b.score
                                && (feature < b.feature || (feature == b.feature && threshold < b.threshold)))
                    }
                };
                if better {
                    best = Some(BestSplit { feature, threshold, score });
                }
            }
        }

        let Some(split) = best else { continue };
        importance[split.feature] += (split.score - purity(weights)).max(0.0);

        // partition members in place: left block first
        let slice = &mut rows[start..end];
        let mut boundary = 0;
        for k in 0..slice.len() {
            if x[slice[k]][split.feature] <= split.threshold {
                slice.swap(boundary, k);
                boundary += 1;
            }
        }
        let left = nodes.len();
        let right = left + 1;
        nodes.push(Node::Leaf { weights: [0.0; 2] });
        nodes.push(Node::Leaf { weights: [0.0; 2] });
        nodes[node] = Node::Split { feature: split.feature, threshold: split.threshold, left, right };
        stack.push((right, start + boundary, end, depth + 1));
        stack.push((left, start, start + boundary, depth + 1));
    }

    (DecisionTree { nodes }, importance)
}
