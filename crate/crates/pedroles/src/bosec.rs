//! Bag of sentence-embedding clusters: mini-batch k-means over sentence
//! vectors, plus the per-document relative-frequency feature vector.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::VectorSet;
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Mini-batch k-means parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KmeansParams {
    pub n_clusters: usize,
    pub batch_size: usize,
    /// Stop when the smoothed batch inertia has not improved for this many
    /// consecutive batches.
    pub no_improvement_window: usize,
    /// Centers whose cumulative assignment count falls below this fraction of
    /// the maximum count are moved to a random batch point after each batch.
    pub reassignment_fraction: f64,
    pub max_batches: usize,
    pub seed: u64,
}

impl KmeansParams {
    pub fn new(seed: u64) -> KmeansParams {
        KmeansParams {
            n_clusters: 300,
            batch_size: 4800,
            no_improvement_window: 50,
            reassignment_fraction: 1e-4,
            max_batches: 1000,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrainMeta {
    pub batches_run: usize,
    /// Full-batch inertia of the training set under the final centroids.
    pub inertia: f64,
}

/// Fitted cluster model: `n` centroids over sentence-vector space.
#[derive(Debug, Clone)]
pub struct ClusterModel {
    pub centroids: Vec<Vec<f64>>,
    pub dim: usize,
    pub seed: u64,
    pub meta: Option<TrainMeta>,
}

impl ClusterModel {
    pub fn n_clusters(&self) -> usize {
        self.centroids.len()
    }
}

/// Fit mini-batch k-means.
///
/// Initialization is k-means++ and batches are sampled uniformly with
/// replacement, both driven by `params.seed`, so a fit is fully determined by
/// its inputs. Updates use the per-center count learning rate
/// `eta = 1/count`: each centroid tracks the running mean of the batch points
/// assigned to it.
pub fn kmeans_fit(vectors: &[Vec<f64>], params: &KmeansParams) -> Result<ClusterModel> {
    let k = params.n_clusters;
    let n = vectors.len();
    if k == 0 {
        return Err(Error::Config("n_clusters must be at least 1".into()));
    }
    if n < k {
        return Err(Error::Config(format!(
            "fewer vectors than clusters: {n} < {k}"
        )));
    }
    if params.batch_size == 0 || params.no_improvement_window == 0 {
        return Err(Error::Config("batch_size and no_improvement_window must be positive".into()));
    }
    let dim = vectors[0].len();
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::Input(format!(
                "training vector {i} has dim {}, expected {dim}",
                v.len()
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input(format!("non-finite value in training vector {i}")));
        }
    }

    let mut rng = SplitMix64::new(params.seed);
    let mut centroids = kmeans_plus_plus(vectors, k, &mut rng);
    let mut counts = vec![0u64; k];

    // Exponentially weighted smoothing of the noisy batch inertia, with more
    // smoothing the smaller the batch is relative to the data.
    let alpha = (2.0 * params.batch_size as f64 / (n as f64 + 1.0)).min(1.0);
    let mut smoothed: Option<f64> = None;
    let mut best = f64::INFINITY;
    let mut stale = 0usize;
    let mut batches_run = 0usize;

    for _ in 0..params.max_batches {
        batches_run += 1;
        let batch: Vec<usize> = (0..params.batch_size).map(|_| rng.next_below(n)).collect();

        let mut batch_inertia = 0.0;
        let assignments: Vec<usize> = batch
            .iter()
            .map(|&i| {
                let (c, d2) = nearest_centroid(&centroids, &vectors[i]);
                batch_inertia += d2;
                c
            })
            .collect();

        for (&i, &c) in batch.iter().zip(&assignments) {
            counts[c] += 1;
            let eta = 1.0 / counts[c] as f64;
            for (cd, xd) in centroids[c].iter_mut().zip(&vectors[i]) {
                *cd += eta * (xd - *cd);
            }
        }

        let max_count = *counts.iter().max().expect("k >= 1");
        let threshold = params.reassignment_fraction * max_count as f64;
        for c in 0..k {
            if (counts[c] as f64) < threshold {
                let pick = batch[rng.next_below(batch.len())];
                centroids[c] = vectors[pick].clone();
                counts[c] = 1;
            }
        }

        let value = match smoothed {
            None => batch_inertia,
            Some(prev) => prev * (1.0 - alpha) + batch_inertia * alpha,
        };
        smoothed = Some(value);
        if value < best {
            best = value;
            stale = 0;
        } else {
            stale += 1;
            if stale >= params.no_improvement_window {
                break;
            }
        }
    }

    let inertia = vectors
        .iter()
        .map(|v| nearest_centroid(&centroids, v).1)
        .sum();
    Ok(ClusterModel {
        centroids,
        dim,
        seed: params.seed,
        meta: Some(TrainMeta {
            batches_run,
            inertia,
        }),
    })
}

/// k-means++ seeding: first center uniform, each next center drawn with
/// probability proportional to its squared distance to the chosen set.
fn kmeans_plus_plus(vectors: &[Vec<f64>], k: usize, rng: &mut SplitMix64) -> Vec<Vec<f64>> {
    let n = vectors.len();
    let mut centroids = Vec::with_capacity(k);
    centroids.push(vectors[rng.next_below(n)].clone());
    let mut dist2: Vec<f64> = vectors
        .iter()
        .map(|v| squared_distance(v, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = dist2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.next_f64() * total;
            let mut chosen = n - 1;
            for (i, &d) in dist2.iter().enumerate() {
                target -= d;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.next_below(n)
        };
        centroids.push(vectors[next].clone());
        let last = centroids.last().expect("just pushed");
        for (d, v) in dist2.iter_mut().zip(vectors) {
            let nd = squared_distance(v, last);
            if nd < *d {
                *d = nd;
            }
        }
    }
    centroids
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

fn nearest_centroid(centroids: &[Vec<f64>], v: &[f64]) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = squared_distance(c, v);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    (best, best_d)
}

/// Index of the centroid nearest to `v` (Euclidean); ties take the lowest
/// index.
pub fn assign(model: &ClusterModel, v: &[f64]) -> Result<usize> {
    if v.len() != model.dim {
        return Err(Error::Input(format!(
            "vector dim {} does not match model dim {}",
            v.len(),
            model.dim
        )));
    }
    Ok(nearest_centroid(&model.centroids, v).0)
}

/// Relative frequency of each cluster over a document's sentence vectors.
pub fn featurize(model: &ClusterModel, sentence_vectors: &[Vec<f64>]) -> Result<Vec<f64>> {
    if sentence_vectors.is_empty() {
        return Err(Error::Input("cannot featurize a document with zero sentences".into()));
    }
    let mut counts = vec![0usize; model.n_clusters()];
    for v in sentence_vectors {
        counts[assign(model, v)?] += 1;
    }
    let total = sentence_vectors.len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / total).collect())
}

/// BoSEC features for every document in a vector set, keyed by doc_id.
pub fn featurize_all(model: &ClusterModel, vectors: &VectorSet) -> Result<BTreeMap<String, Vec<f64>>> {
    let entries: Vec<(String, Result<Vec<f64>>)> = vectors
        .iter()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(id, vecs)| (id.to_string(), featurize(model, vecs)))
        .collect();
    let mut features = BTreeMap::new();
    for (id, result) in entries {
        features.insert(id, result?);
    }
    Ok(features)
}

/// Serialize a model as text: `<N> <dim> <seed>` header plus one centroid
/// per line at 9 significant digits.
pub fn save_model(path: &Path, model: &ClusterModel) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "{} {} {}", model.n_clusters(), model.dim, model.seed).expect("string write");
    for centroid in &model.centroids {
        let mut first = true;
        for value in centroid {
            if !first {
                out.push(' ');
            }
            first = false;
            write!(out, "{value:.8e}").expect("string write");
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<ClusterModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Input(format!("{}: empty model file", path.display())))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(Error::Input(format!(
            "{}: malformed model header {header:?}",
            path.display()
        )));
    }
    let n: usize = fields[0]
        .parse()
        .map_err(|_| Error::Input(format!("{}: bad cluster count", path.display())))?;
    let dim: usize = fields[1]
        .parse()
        .map_err(|_| Error::Input(format!("{}: bad dimension", path.display())))?;
    let seed: u64 = fields[2]
        .parse()
        .map_err(|_| Error::Input(format!("{}: bad seed", path.display())))?;

    let mut centroids = Vec::with_capacity(n);
    for (i, line) in lines.enumerate().take(n) {
        let centroid: Vec<f64> = line
            .split_whitespace()
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Input(format!("{}: bad value on line {}", path.display(), i + 2)))?;
        if centroid.len() != dim {
            return Err(Error::Input(format!(
                "{}: centroid {} has {} values, expected {dim}",
                path.display(),
                i,
                centroid.len()
            )));
        }
        centroids.push(centroid);
    }
    if centroids.len() != n {
        return Err(Error::Input(format!(
            "{}: header promises {n} centroids, file has {}",
            path.display(),
            centroids.len()
        )));
    }
    Ok(ClusterModel {
        centroids,
        dim,
        seed,
        meta: None,
    })
}
