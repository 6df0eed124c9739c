//! k-nearest-neighbor role prediction over BoSEC feature vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roles::{Role, RoleSet};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KnnConfig {
    pub k: usize,
    /// A role is predicted when at least this many neighbors carry it.
    pub vote_threshold: usize,
}

impl KnnConfig {
    /// k neighbors with a strict-majority vote threshold.
    pub fn new(k: usize) -> KnnConfig {
        KnnConfig {
            k,
            vote_threshold: k / 2 + 1,
        }
    }
}

impl Default for KnnConfig {
    fn default() -> KnnConfig {
        KnnConfig::new(3)
    }
}

/// One training document: its id, feature vector, and resolved roles.
#[derive(Debug, Clone)]
pub struct LabeledPoint {
    pub doc_id: String,
    pub features: Vec<f64>,
    pub roles: RoleSet,
}

/// Manhattan (L1) distance.
pub fn manhattan(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Predict roles as those carried by a majority of the k nearest training
/// documents under L1 distance. Distance ties resolve to the lower doc_id;
/// an empty result means "no prediction".
pub fn knn_predict(config: &KnnConfig, train: &[LabeledPoint], query: &[f64]) -> Result<RoleSet> {
    if config.k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if train.len() < config.k {
        return Err(Error::Config(format!(
            "fewer training documents than k: {} < {}",
            train.len(),
            config.k
        )));
    }
    let mut scored: Vec<(f64, &LabeledPoint)> = Vec::with_capacity(train.len());
    for point in train {
        if point.features.len() != query.len() {
            return Err(Error::Input(format!(
                "feature dim mismatch between query ({}) and doc {} ({})",
                query.len(),
                point.doc_id,
                point.features.len()
            )));
        }
        scored.push((manhattan(&point.features, query), point));
    }
    scored.sort_by(|(da, pa), (db, pb)| {
        da.total_cmp(db).then_with(|| pa.doc_id.cmp(&pb.doc_id))
    });

    let mut votes = [0usize; 7];
    for (_, point) in scored.iter().take(config.k) {
        for role in point.roles.iter() {
            votes[role.index()] += 1;
        }
    }
    Ok(Role::ALL
        .into_iter()
        .filter(|r| votes[r.index()] >= config.vote_threshold)
        .collect())
}
