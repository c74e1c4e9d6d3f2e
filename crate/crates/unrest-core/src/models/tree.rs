//! Decision tree with gain-ratio splits on numeric thresholds. Leaf class
//! frequencies (Laplace-smoothed) stand in for probabilities; the
//! comparison tables only ever use its binary predictions.

use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::{validate_training_input, FittedModel, ModelParams, Standardizer};

#[derive(Debug, Clone)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: 6,
            min_leaf: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        probability: f64,
    },
}

fn entropy(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut h = 0.0;
    for count in [pos, n - pos] {
        if count > 0 {
            let p = count as f64 / n as f64;
            h -= p * p.log2();
        }
    }
    h
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain_ratio: f64,
}

fn best_split(
    rows: &[Vec<f64>],
    labels: &[u8],
    indices: &[usize],
    min_leaf: usize,
) -> Option<SplitChoice> {
    let dim = rows[0].len();
    let n = indices.len();
    let pos = indices.iter().filter(|&&i| labels[i] == 1).count();
    let node_entropy = entropy(pos, n);
    if node_entropy == 0.0 {
        return None;
    }

    let mut best: Option<SplitChoice> = None;
    for feature in 0..dim {
        let mut ordered: Vec<(f64, u8)> = indices
            .iter()
            .map(|&i| (rows[i][feature], labels[i]))
            .collect();
        ordered.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut left_n = 0usize;
        let mut left_pos = 0usize;
        for k in 0..n - 1 {
            left_n += 1;
            left_pos += ordered[k].1 as usize;
            if ordered[k].0 == ordered[k + 1].0 {
                continue;
            }
            let right_n = n - left_n;
            if left_n < min_leaf || right_n < min_leaf {
                continue;
            }
            let right_pos = pos - left_pos;
            let wl = left_n as f64 / n as f64;
            let wr = right_n as f64 / n as f64;
            let gain = node_entropy
                - wl * entropy(left_pos, left_n)
                - wr * entropy(right_pos, right_n);
            if gain <= 1e-12 {
                continue;
            }
            let split_info = -(wl * wl.log2() + wr * wr.log2());
            let gain_ratio = gain / split_info;
            let threshold = (ordered[k].0 + ordered[k + 1].0) / 2.0;
            if best.as_ref().is_none_or(|b| gain_ratio > b.gain_ratio) {
                best = Some(SplitChoice {
                    feature,
                    threshold,
                    gain_ratio,
                });
            }
        }
    }
    best
}

fn build(
    rows: &[Vec<f64>],
    labels: &[u8],
    indices: Vec<usize>,
    depth: usize,
    cfg: &TreeConfig,
    nodes: &mut Vec<TreeNode>,
) -> usize {
    let n = indices.len();
    let pos = indices.iter().filter(|&&i| labels[i] == 1).count();
    let make_leaf = |nodes: &mut Vec<TreeNode>| {
        nodes.push(TreeNode::Leaf {
            probability: (pos as f64 + 1.0) / (n as f64 + 2.0),
        });
        nodes.len() - 1
    };

    if depth >= cfg.max_depth || n < 2 * cfg.min_leaf {
        return make_leaf(nodes);
    }
    let Some(split) = best_split(rows, labels, &indices, cfg.min_leaf) else {
        return make_leaf(nodes);
    };

    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
        .into_iter()
        .partition(|&i| rows[i][split.feature] <= split.threshold);

    let slot = nodes.len();
    nodes.push(TreeNode::Leaf { probability: 0.0 }); // placeholder
    let left = build(rows, labels, left_idx, depth + 1, cfg, nodes);
    let right = build(rows, labels, right_idx, depth + 1, cfg, nodes);
    nodes[slot] = TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left,
        right,
    };
    slot
}

pub fn fit_tree(rows: &[Vec<f64>], labels: &[u8], cfg: &TreeConfig) -> Result<FittedModel> {
    let dim = validate_training_input(rows, labels)?;
    let mut nodes = Vec::new();
    build(rows, labels, (0..rows.len()).collect(), 0, cfg, &mut nodes);
    Ok(FittedModel {
        params: ModelParams::Tree { nodes },
        standardizer: Standardizer::identity(dim),
        cutoff: 0.5,
        converged: true,
    })
}

pub(crate) fn predict(nodes: &[TreeNode], row: &[f64]) -> f64 {
    let mut at = 0usize;
    loop {
        match &nodes[at] {
            TreeNode::Leaf { probability } => return *probability,
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                at = if row[*feature] <= *threshold { *left } else { *right };
            }
        }
    }
}
