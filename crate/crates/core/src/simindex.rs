//! Similarity measures, historical-test retrieval and patch centroids.
//!
//! Test similarity is Euclidean-based: `1 / (1 + ‖a − b‖)`, bounded in
//! `(0, 1]`. Patch vectors produced by the built-in embedder are sums of
//! unit hunk vectors and are not normalized, so Euclidean scores on
//! patches depend on hunk count while cosine scores do not.

use crate::corpus::SearchSpace;
use crate::embedding::{mean_vector, EmbeddingError, EmbeddingVector, VectorStore};
use indexmap::IndexSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::str::FromStr;
use thiserror::Error;

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_T_TEST: f64 = 0.8;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("cosine similarity undefined for an all-zero vector")]
    ZeroVector,
    #[error("no neighbors to average")]
    EmptyNeighborSet,
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityMeasure {
    Cosine,
    EuclideanSim,
    LevenshteinSim,
}

impl FromStr for SimilarityMeasure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cosine" => Ok(Self::Cosine),
            "euclidean" | "euclidean_sim" => Ok(Self::EuclideanSim),
            "levenshtein" | "levenshtein_sim" => Ok(Self::LevenshteinSim),
            other => Err(format!("unknown measure {other:?}")),
        }
    }
}

fn check_dims(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<(), SimError> {
    if a.dim() != b.dim() {
        return Err(SimError::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(())
}

/// Cosine similarity clamped to `[-1, 1]`.
pub fn cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, SimError> {
    check_dims(a, b)?;
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(SimError::ZeroVector);
    }
    let dot: f64 = a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

pub fn euclidean_distance(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, SimError> {
    check_dims(a, b)?;
    Ok(a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// `1 / (1 + d)` for Euclidean distance `d`.
pub fn euclidean_sim(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, SimError> {
    Ok(1.0 / (1.0 + euclidean_distance(a, b)?))
}

/// Unit-cost edit distance over Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 − L(a,b) / max(|a|,|b|)`; 1.0 for two empty strings.
pub fn levenshtein_sim(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / longest as f64
}

/// A retrieved historical test and the correct patch linked to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub test_id: String,
    pub patch_id: String,
    pub similarity: f64,
}

/// Orders by similarity descending, then test id ascending.
pub fn neighbor_order(a: &Neighbor, b: &Neighbor) -> Ordering {
    b.similarity
        .total_cmp(&a.similarity)
        .then_with(|| a.test_id.cmp(&b.test_id))
}

/// Scores every search-space test by its best Euclidean similarity to any
/// failing test, keeps those strictly above `t_test`, and returns the top
/// `k` of them.
pub fn retrieve_similar_tests<'a, I>(
    failing_ids: I,
    space: &SearchSpace<'_>,
    test_vecs: &VectorStore,
    k: usize,
    t_test: f64,
) -> Result<Vec<Neighbor>, SimError>
where
    I: IntoIterator<Item = &'a str>,
{
    let failing: Vec<&EmbeddingVector> = failing_ids
        .into_iter()
        .map(|id| test_vecs.require(id))
        .collect::<Result<_, _>>()?;
    if failing.is_empty() || space.is_empty() || k == 0 {
        return Ok(Vec::new());
    }

    let scored: Vec<Option<Neighbor>> = space
        .entries()
        .par_iter()
        .map(|entry| -> Result<Option<Neighbor>, SimError> {
            let hv = test_vecs.require(&entry.test.id)?;
            let mut best = f64::NEG_INFINITY;
            for fv in &failing {
                best = best.max(euclidean_sim(fv, hv)?);
            }
            Ok((best > t_test).then(|| Neighbor {
                test_id: entry.test.id.clone(),
                patch_id: entry.patch.id.clone(),
                similarity: best,
            }))
        })
        .collect::<Result<_, _>>()?;

    let mut hits: Vec<Neighbor> = scored.into_iter().flatten().collect();
    hits.sort_by(neighbor_order);
    hits.truncate(k);
    Ok(hits)
}

/// Patch ids of `neighbors`, deduplicated, first-seen order.
pub fn distinct_patch_ids(neighbors: &[Neighbor]) -> Vec<&str> {
    let set: IndexSet<&str> = neighbors.iter().map(|n| n.patch_id.as_str()).collect();
    set.into_iter().collect()
}

/// Mean vector over the distinct patches reached by `neighbors`.
pub fn patch_centroid(
    neighbors: &[Neighbor],
    patch_vecs: &VectorStore,
) -> Result<EmbeddingVector, SimError> {
    let ids = distinct_patch_ids(neighbors);
    if ids.is_empty() {
        return Err(SimError::EmptyNeighborSet);
    }
    let vecs = ids
        .iter()
        .map(|id| patch_vecs.require(id))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(mean_vector(vecs).expect("non-empty"))
}
