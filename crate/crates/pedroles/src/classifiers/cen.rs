//! Multi-label centroid classifier over sentence vectors.
//!
//! Each role is one centroid: the mean of every sentence vector of every
//! training document bearing the role. A document is predicted to have the
//! roles that win strictly more than a third of its sentence assignments,
//! which caps predictions at two roles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roles::{Role, RoleSet};

/// Sentence-to-centroid distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CenDistance {
    Euclidean,
    Cosine,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CenModel {
    /// Per-role centroids in canonical role order; roles without training
    /// sentences are absent.
    pub centroids: Vec<(Role, Vec<f64>)>,
    /// Roles seen nowhere in the training data.
    pub missing: Vec<Role>,
    pub distance: CenDistance,
    /// Strict vote threshold as a fraction (numerator, denominator).
    pub threshold: (u32, u32),
}

impl CenModel {
    pub fn from_centroids(centroids: Vec<(Role, Vec<f64>)>) -> CenModel {
        let missing = Role::ALL
            .into_iter()
            .filter(|r| !centroids.iter().any(|(cr, _)| cr == r))
            .collect();
        CenModel {
            centroids,
            missing,
            distance: CenDistance::Euclidean,
            threshold: (1, 3),
        }
    }
}

/// Fit per-role centroids from `(roles, sentence vectors)` training pairs.
///
/// A document with several roles contributes its vectors to each of them.
pub fn cen_fit(train: &[(RoleSet, &[Vec<f64>])]) -> Result<CenModel> {
    cen_fit_with(train, CenDistance::Euclidean)
}

pub fn cen_fit_with(train: &[(RoleSet, &[Vec<f64>])], distance: CenDistance) -> Result<CenModel> {
    if train.is_empty() {
        return Err(Error::Config("cen_fit requires training documents".into()));
    }
    let dim = train
        .iter()
        .flat_map(|(_, vecs)| vecs.iter())
        .map(Vec::len)
        .next()
        .ok_or_else(|| Error::Input("cen_fit got documents with no sentence vectors".into()))?;

    let mut sums = vec![vec![0.0f64; dim]; Role::ALL.len()];
    let mut counts = vec![0usize; Role::ALL.len()];
    for (roles, vectors) in train {
        for v in *vectors {
            if v.len() != dim {
                return Err(Error::Input(format!(
                    "sentence vector dim {} does not match {dim}",
                    v.len()
                )));
            }
            for role in roles.iter() {
                let sum = &mut sums[role.index()];
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
                counts[role.index()] += 1;
            }
        }
    }

    let mut centroids = Vec::new();
    let mut missing = Vec::new();
    for role in Role::ALL {
        let count = counts[role.index()];
        if count == 0 {
            missing.push(role);
            continue;
        }
        let centroid = sums[role.index()]
            .iter()
            .map(|s| s / count as f64)
            .collect();
        centroids.push((role, centroid));
    }
    if centroids.is_empty() {
        return Err(Error::Input("no role has any training sentence vectors".into()));
    }
    Ok(CenModel {
        centroids,
        missing,
        distance,
        threshold: (1, 3),
    })
}

fn distance(kind: CenDistance, a: &[f64], b: &[f64]) -> f64 {
    match kind {
        CenDistance::Euclidean => a
            .iter()
            .zip(b)
            .map(|(x, y)| {
                let d = x - y;
                d * d
            })
            .sum(),
        CenDistance::Cosine => {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            if na == 0.0 || nb == 0.0 {
                1.0
            } else {
                1.0 - dot / (na * nb)
            }
        }
    }
}

/// Predict the roles of a document from its sentence vectors.
///
/// Every sentence votes for its nearest role centroid (ties resolve to the
/// earlier role in canonical order); a role is predicted when its votes
/// strictly exceed the threshold fraction of all sentences.
pub fn cen_predict(model: &CenModel, sentence_vectors: &[Vec<f64>]) -> RoleSet {
    let mut votes = [0usize; 7];
    let mut total = 0usize;
    for v in sentence_vectors {
        let mut best: Option<(Role, f64)> = None;
        for (role, centroid) in &model.centroids {
            let d = distance(model.distance, v, centroid);
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((*role, d));
            }
        }
        if let Some((role, _)) = best {
            votes[role.index()] += 1;
            total += 1;
        }
    }

    let (num, den) = model.threshold;
    let mut predicted = RoleSet::new();
    for role in Role::ALL {
        // votes/total > num/den, in exact integer arithmetic.
        if votes[role.index()] as u64 * den as u64 > total as u64 * num as u64 {
            predicted.insert(role);
        }
    }
    predicted
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vecs(rows: &[&[f64]]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn centroid_is_mean_of_vectors() {
        let doc = vecs(&[&[1.0, 0.0], &[3.0, 2.0]]);
        let train = [(RoleSet::singleton(Role::Survey), doc.as_slice())];
        let model = cen_fit(&train).unwrap();
        assert_eq!(model.centroids.len(), 1);
        assert_eq!(model.centroids[0].0, Role::Survey);
        assert_eq!(model.centroids[0].1, vec![2.0, 1.0]);
        assert_eq!(model.missing.len(), 6);
    }

    #[test]
    fn multi_role_doc_feeds_both_centroids() {
        let doc = vecs(&[&[4.0], &[6.0]]);
        let roles: RoleSet = [Role::Resource, Role::EmpiricalResults].into_iter().collect();
        let train = [(roles, doc.as_slice())];
        let model = cen_fit(&train).unwrap();
        let get = |role: Role| {
            model
                .centroids
                .iter()
                .find(|(r, _)| *r == role)
                .map(|(_, c)| c.clone())
                .unwrap()
        };
        assert_eq!(get(Role::Resource), vec![5.0]);
        assert_eq!(get(Role::EmpiricalResults), vec![5.0]);
    }

    #[test]
    fn fit_matches_brute_force_oracle() {
        // Three docs with overlapping roles; oracle sums every vector that
        // should contribute, straight off the definitions.
        let d1 = vecs(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let d2 = vecs(&[&[5.0, 6.0]]);
        let d3 = vecs(&[&[7.0, 8.0], &[9.0, 10.0], &[11.0, 12.0]]);
        let survey_tutorial: RoleSet = [Role::Survey, Role::Tutorial].into_iter().collect();
        let train = [
            (RoleSet::singleton(Role::Survey), d1.as_slice()),
            (survey_tutorial, d2.as_slice()),
            (RoleSet::singleton(Role::Tutorial), d3.as_slice()),
        ];
        let model = cen_fit(&train).unwrap();

        let survey_vectors = [&d1[0], &d1[1], &d2[0]];
        let tutorial_vectors = [&d2[0], &d3[0], &d3[1], &d3[2]];
        for (role, expected) in [
            (Role::Survey, survey_vectors.as_slice()),
            (Role::Tutorial, tutorial_vectors.as_slice()),
        ] {
            let mut mean = vec![0.0, 0.0];
            for v in expected {
                mean[0] += v[0];
                mean[1] += v[1];
            }
            mean[0] /= expected.len() as f64;
            mean[1] /= expected.len() as f64;
            let got = &model.centroids.iter().find(|(r, _)| *r == role).unwrap().1;
            for (g, e) in got.iter().zip(&mean) {
                assert!((g - e).abs() < 1e-9);
            }
        }
    }

    fn axis_model() -> CenModel {
        CenModel::from_centroids(vec![
            (Role::Survey, vec![1.0, 0.0, 0.0]),
            (Role::Tutorial, vec![0.0, 1.0, 0.0]),
            (Role::Resource, vec![0.0, 0.0, 1.0]),
        ])
    }

    #[test]
    fn two_thirds_majority_wins_alone() {
        let model = axis_model();
        let doc = vecs(&[&[1.0, 0.0, 0.0], &[1.0, 0.1, 0.0], &[0.0, 1.0, 0.0]]);
        assert_eq!(cen_predict(&model, &doc), RoleSet::singleton(Role::Survey));
    }

    #[test]
    fn two_sentences_split_predicts_both() {
        let model = axis_model();
        let doc = vecs(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let expected: RoleSet = [Role::Survey, Role::Tutorial].into_iter().collect();
        assert_eq!(cen_predict(&model, &doc), expected);
    }

    #[test]
    fn exact_thirds_predicts_nothing() {
        let model = axis_model();
        let doc = vecs(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert_eq!(cen_predict(&model, &doc), RoleSet::EMPTY);
    }

    #[test]
    fn tie_sentence_goes_to_canonical_first_role() {
        let model = axis_model();
        // Equidistant from all three centroids.
        let doc = vecs(&[&[0.5, 0.5, 0.5], &[0.5, 0.5, 0.5]]);
        assert_eq!(cen_predict(&model, &doc), RoleSet::singleton(Role::Survey));
    }

    #[test]
    fn prediction_cardinality_never_exceeds_two() {
        let model = axis_model();
        let mut rng = crate::rng::SplitMix64::new(5);
        for _ in 0..200 {
            let n = 1 + rng.next_below(15);
            let doc: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..3).map(|_| rng.next_f64()).collect())
                .collect();
            assert!(cen_predict(&model, &doc).len() <= 2);
        }
    }
}
