//! One-vs-rest random forests over TF-IDF features.
//!
//! Binary CART trees with Gini impurity, midpoint thresholds, bootstrap
//! sampling, and per-split feature subsampling; everything is driven by the
//! params seed so fits are reproducible.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, SplitMix64};
use crate::roles::{Role, RoleSet};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RfParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Features examined per split; `None` means `floor(sqrt(n_features))`.
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl RfParams {
    pub fn new(seed: u64) -> RfParams {
        RfParams {
            n_trees: 10,
            max_depth: 75,
            min_samples_split: 5,
            min_samples_leaf: 1,
            features_per_split: None,
            bootstrap: true,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) enum Node {
    Leaf {
        positive: bool,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct Tree {
    pub(crate) nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, row: &[f64]) -> bool {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { positive } => return *positive,
                Node::Split {
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
}

/// One binary forest per role present in the training data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestModel {
    pub(crate) forests: Vec<(Role, Vec<Tree>)>,
    pub n_features: usize,
    pub params: RfParams,
    /// Roles with no positive training example; never predicted.
    pub missing: Vec<Role>,
}

/// Fit one-vs-rest forests from dense feature rows and role labels.
pub fn rf_fit(rows: &[Vec<f64>], labels: &[RoleSet], params: &RfParams) -> Result<ForestModel> {
    if rows.is_empty() {
        return Err(Error::Config("rf_fit requires training rows".into()));
    }
    if rows.len() != labels.len() {
        return Err(Error::Input(format!(
            "{} rows but {} label sets",
            rows.len(),
            labels.len()
        )));
    }
    if params.n_trees == 0 {
        return Err(Error::Config("n_trees must be at least 1".into()));
    }
    let n_features = rows[0].len();
    if n_features == 0 {
        return Err(Error::Config("rf_fit requires at least one feature".into()));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n_features {
            return Err(Error::Input(format!(
                "row {i} has {} features, expected {n_features}",
                row.len()
            )));
        }
    }
    let m = params
        .features_per_split
        .unwrap_or_else(|| (n_features as f64).sqrt().floor() as usize)
        .clamp(1, n_features);

    let mut forests = Vec::new();
    let mut missing = Vec::new();
    for role in Role::ALL {
        let ys: Vec<bool> = labels.iter().map(|set| set.contains(role)).collect();
        if !ys.iter().any(|&y| y) {
            missing.push(role);
            continue;
        }
        let role_seed = derive_seed(params.seed, 1 + role.index() as u64);
        let tree_seeds: Vec<u64> = (0..params.n_trees)
            .map(|t| derive_seed(role_seed, t as u64))
            .collect();
        let trees: Vec<Tree> = tree_seeds
            .iter()
            .map(|&tree_seed| build_tree(rows, &ys, params, m, tree_seed))
            .collect();
        forests.push((role, trees));
    }
    Ok(ForestModel {
        forests,
        n_features,
        params: params.clone(),
        missing,
    })
}

fn build_tree(rows: &[Vec<f64>], ys: &[bool], params: &RfParams, m: usize, seed: u64) -> Tree {
    let mut rng = SplitMix64::new(seed);
    let n = rows.len();
    let indices: Vec<usize> = if params.bootstrap {
        (0..n).map(|_| rng.next_below(n)).collect()
    } else {
        (0..n).collect()
    };
    let mut tree = Tree { nodes: Vec::new() };
    grow(&mut tree, rows, ys, indices, 0, params, m, &mut rng);
    tree
}

/// Grow the subtree for `indices`, returning its node id.
#[allow(clippy::too_many_arguments)]
fn grow(
    tree: &mut Tree,
    rows: &[Vec<f64>],
    ys: &[bool],
    indices: Vec<usize>,
    depth: usize,
    params: &RfParams,
    m: usize,
    rng: &mut SplitMix64,
) -> usize {
    let n = indices.len();
    let positives = indices.iter().filter(|&&i| ys[i]).count();
    let make_leaf = |tree: &mut Tree| {
        tree.nodes.push(Node::Leaf {
            positive: positives * 2 > n,
        });
        tree.nodes.len() - 1
    };

    if depth >= params.max_depth
        || n < params.min_samples_split
        || positives == 0
        || positives == n
    {
        return make_leaf(tree);
    }
    let Some((feature, threshold)) = best_split(rows, ys, &indices, params, m, rng) else {
        return make_leaf(tree);
    };

    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
        .into_iter()
        .partition(|&i| rows[i][feature] <= threshold);

    let node = tree.nodes.len();
    tree.nodes.push(Node::Split {
        feature,
        threshold,
        left: 0,
        right: 0,
    });
    let left = grow(tree, rows, ys, left_idx, depth + 1, params, m, rng);
    let right = grow(tree, rows, ys, right_idx, depth + 1, params, m, rng);
    if let Node::Split {
        left: l, right: r, ..
    } = &mut tree.nodes[node]
    {
        *l = left;
        *r = right;
    }
    node
}

/// Best (feature, midpoint threshold) by Gini impurity decrease over a
/// seeded sample of `m` features. Returns None when no split improves.
fn best_split(
    rows: &[Vec<f64>],
    ys: &[bool],
    indices: &[usize],
    params: &RfParams,
    m: usize,
    rng: &mut SplitMix64,
) -> Option<(usize, f64)> {
    let n = indices.len();
    let n_features = rows[0].len();
    let features = rng.sample_indices(n_features, m);

    let total_pos = indices.iter().filter(|&&i| ys[i]).count();
    let parent_gini = gini(total_pos, n);

    let mut best: Option<(f64, usize, f64)> = None;
    let mut column: Vec<(f64, bool)> = Vec::with_capacity(n);
    for &feature in &features {
        column.clear();
        column.extend(indices.iter().map(|&i| (rows[i][feature], ys[i])));
        column.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut left_pos = 0usize;
        for i in 0..n - 1 {
            if column[i].1 {
                left_pos += 1;
            }
            if column[i].0 == column[i + 1].0 {
                continue;
            }
            let left_n = i + 1;
            let right_n = n - left_n;
            if left_n < params.min_samples_leaf || right_n < params.min_samples_leaf {
                continue;
            }
            let weighted = (left_n as f64 * gini(left_pos, left_n)
                + right_n as f64 * gini(total_pos - left_pos, right_n))
                / n as f64;
            let decrease = parent_gini - weighted;
            if decrease > 1e-12 && best.map_or(true, |(bd, _, _)| decrease > bd) {
                let threshold = (column[i].0 + column[i + 1].0) / 2.0;
                best = Some((decrease, feature, threshold));
            }
        }
    }
    best.map(|(_, feature, threshold)| (feature, threshold))
}

fn gini(positives: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = positives as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

/// Predict roles: a role is included when strictly more than half of its
/// forest's trees vote positive.
pub fn rf_predict(model: &ForestModel, row: &[f64]) -> RoleSet {
    let mut predicted = RoleSet::new();
    for (role, trees) in &model.forests {
        let votes = trees.iter().filter(|t| t.predict(row)).count();
        if votes * 2 > trees.len() {
            predicted.insert(*role);
        }
    }
    predicted
}
