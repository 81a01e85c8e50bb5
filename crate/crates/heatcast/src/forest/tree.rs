//! CART regression trees grown on bootstrap resamples.
//!
//! Row indices everywhere in this file are *canonical* indices: positions in
//! the content-sorted training data, so tree structure never depends on the
//! caller's row order. Splits minimize the weighted sum of squared errors of
//! the two children, with ties broken toward the lowest feature index and
//! then the smallest threshold. Thresholds sit at midpoints strictly between
//! consecutive observed feature values; rows with `x <= threshold` go left.

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        /// Distinct in-bag canonical row indices, ascending.
        rows: Vec<u32>,
        /// Weighted mean response of the in-bag sample at this leaf.
        mean: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    /// Index of the leaf reached by `x`.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if x[*feature] <= *threshold { *left } else { *right };
                }
                TreeNode::Leaf { .. } => return idx,
            }
        }
    }

    pub fn leaf(&self, x: &[f64]) -> (&[u32], f64) {
        match &self.nodes[self.leaf_index(x)] {
            TreeNode::Leaf { rows, mean } => (rows, *mean),
            TreeNode::Split { .. } => unreachable!("leaf_index returns a leaf"),
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.leaf(x).1
    }
}

/// Immutable view of the canonicalized training data used during growth.
pub(crate) struct GrowContext<'a> {
    pub x: &'a [f64], // row-major, n_rows x n_features
    pub y: &'a [f64],
    pub case_weights: &'a [f64],
    pub n_features: usize,
    pub min_leaf: u32,
    pub max_depth: Option<u32>,
    pub mtry: usize,
}

impl GrowContext<'_> {
    fn feature(&self, row: u32, f: usize) -> f64 {
        self.x[row as usize * self.n_features + f]
    }
}

/// Grows one tree over the rows with `counts[i] > 0`, where `counts` are
/// bootstrap multiplicities. Each row enters the split criterion with
/// effective weight `counts[i] * case_weights[i]`.
pub(crate) fn grow_tree<R: Rng>(ctx: &GrowContext, counts: &[u32], rng: &mut R) -> Tree {
    let members: Vec<u32> = (0..counts.len() as u32)
        .filter(|&i| counts[i as usize] > 0)
        .collect();
    debug_assert!(!members.is_empty(), "bootstrap sample cannot be empty");
    let mut nodes = Vec::new();
    build_node(ctx, counts, members, 0, &mut nodes, rng);
    Tree { nodes }
}

fn build_node<R: Rng>(
    ctx: &GrowContext,
    counts: &[u32],
    members: Vec<u32>,
    depth: u32,
    nodes: &mut Vec<TreeNode>,
    rng: &mut R,
) -> usize {
    let mut n_in_bag: u64 = 0;
    let mut sum_u = 0.0;
    let mut sum_uy = 0.0;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for &i in &members {
        let u = counts[i as usize] as f64 * ctx.case_weights[i as usize];
        let y = ctx.y[i as usize];
        n_in_bag += counts[i as usize] as u64;
        sum_u += u;
        sum_uy += u * y;
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    let mean = sum_uy / sum_u;

    let forced_leaf = y_min == y_max
        || n_in_bag < 2 * ctx.min_leaf as u64
        || ctx.max_depth.is_some_and(|d| depth >= d);

    let split = if forced_leaf {
        None
    } else {
        find_best_split(ctx, counts, &members, rng)
    };

    match split {
        Some((feature, threshold)) => {
            let (left_members, right_members): (Vec<u32>, Vec<u32>) = members
                .iter()
                .partition(|&&i| ctx.feature(i, feature) <= threshold);
            let idx = nodes.len();
            nodes.push(TreeNode::Leaf {
                rows: Vec::new(),
                mean,
            }); // placeholder
            let left = build_node(ctx, counts, left_members, depth + 1, nodes, rng);
            let right = build_node(ctx, counts, right_members, depth + 1, nodes, rng);
            nodes[idx] = TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            };
            idx
        }
        None => {
            let idx = nodes.len();
            nodes.push(TreeNode::Leaf {
                rows: members,
                mean,
            });
            idx
        }
    }
}

/// Best `(feature, threshold)` among `mtry` sampled candidate features, or
/// `None` when every candidate is constant over the node.
fn find_best_split<R: Rng>(
    ctx: &GrowContext,
    counts: &[u32],
    members: &[u32],
    rng: &mut R,
) -> Option<(usize, f64)> {
    let candidates = sample_features(ctx.n_features, ctx.mtry, rng);

    // Maximizing sum of (sum_uy)^2 / sum_u over the two children is
    // equivalent to minimizing their combined weighted SSE.
    let mut best: Option<(f64, usize, f64)> = None;
    let mut order: Vec<(f64, u32)> = Vec::with_capacity(members.len());

    for &feature in &candidates {
        order.clear();
        order.extend(
            members
                .iter()
                .map(|&i| (ctx.feature(i, feature), i)),
        );
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut total_u = 0.0;
        let mut total_uy = 0.0;
        let mut total_n: u64 = 0;
        for &(_, i) in order.iter() {
            let u = counts[i as usize] as f64 * ctx.case_weights[i as usize];
            total_u += u;
            total_uy += u * ctx.y[i as usize];
            total_n += counts[i as usize] as u64;
        }

        let mut left_u = 0.0;
        let mut left_uy = 0.0;
        let mut left_n: u64 = 0;
        for k in 0..order.len() - 1 {
            let (xv, i) = order[k];
            let u = counts[i as usize] as f64 * ctx.case_weights[i as usize];
            left_u += u;
            left_uy += u * ctx.y[i as usize];
            left_n += counts[i as usize] as u64;

            let x_next = order[k + 1].0;
            if x_next == xv {
                continue;
            }
            let threshold = 0.5 * (xv + x_next);
            if !(threshold > xv && threshold < x_next) {
                continue; // adjacent floats admit no strictly-interior threshold
            }
            let right_n = total_n - left_n;
            if left_n < ctx.min_leaf as u64 || right_n < ctx.min_leaf as u64 {
                continue;
            }
            let right_u = total_u - left_u;
            let right_uy = total_uy - left_uy;
            let score = left_uy * left_uy / left_u + right_uy * right_uy / right_u;
            let better = match best {
                None => true,
                Some((best_score, best_feature, best_threshold)) => {
                    score > best_score
                        || (score == best_score
                            && (feature < best_feature
                                || (feature == best_feature && threshold < best_threshold)))
                }
            };
            if better {
                best = Some((score, feature, threshold));
            }
        }
    }

    best.map(|(_, feature, threshold)| (feature, threshold))
}

/// Samples `mtry` distinct feature indices uniformly, returned ascending.
fn sample_features<R: Rng>(n_features: usize, mtry: usize, rng: &mut R) -> Vec<usize> {
    if mtry >= n_features {
        return (0..n_features).collect();
    }
    let mut pool: Vec<usize> = (0..n_features).collect();
    for k in 0..mtry {
        let j = rng.gen_range(k..n_features);
        pool.swap(k, j);
    }
    let mut chosen = pool[..mtry].to_vec();
    chosen.sort_unstable();
    chosen
}
