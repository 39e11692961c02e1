//! Candidate scoring, baselines, ranking, and the external-verdict combiner.
//!
//! A candidate is judged against the mean of the correct patches whose
//! failing tests resemble the candidate bug's failing tests. When no
//! historical test clears `t_test` the predictor abstains.

use crate::corpus::{Corpus, Patch, SearchSpace};
use crate::embedding::{mean_vector, EmbeddingError, EmbeddingVector, VectorStore};
use crate::simindex::{
    cosine, distinct_patch_ids, euclidean_sim, levenshtein_sim, patch_centroid,
    retrieve_similar_tests, Neighbor, SimError, SimilarityMeasure, DEFAULT_K, DEFAULT_T_TEST,
};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

pub const DEFAULT_T_PATCH: f64 = 0.5;

#[derive(Debug, Error)]
pub enum PredictError {
    #[error(transparent)]
    Similarity(#[from] SimError),
    #[error("search space holds no correct patches")]
    EmptySearchSpace,
    #[error("measure {0:?} cannot compare patch vectors")]
    UnsupportedMeasure(SimilarityMeasure),
    #[error("patch {0:?} not found in corpus")]
    UnknownPatch(String),
    #[error("no external prediction for abstained patch {0:?}")]
    MissingExternalPrediction(String),
    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),
    #[error("external predictions line {line}: {message}")]
    ExternalParse { line: usize, message: String },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl From<EmbeddingError> for PredictError {
    fn from(e: EmbeddingError) -> Self {
        PredictError::Similarity(SimError::Embedding(e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Correct,
    Incorrect,
    Abstain,
    /// The candidate could not be processed; see the record's `error`.
    Error,
}

impl Verdict {
    pub fn is_decided(self) -> bool {
        matches!(self, Verdict::Correct | Verdict::Incorrect)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// Test-guided retrieval prediction.
    Bats,
    BaselineHistory,
    BaselineLevenshtein,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub patch_id: String,
    /// `None` only for abstentions and errors.
    pub score: Option<f64>,
    pub verdict: Verdict,
    pub source: Source,
    pub evidence: Vec<Neighbor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl PredictionRecord {
    fn decided(patch_id: &str, score: f64, t_patch: f64, source: Source, evidence: Vec<Neighbor>) -> Self {
        Self {
            patch_id: patch_id.to_string(),
            score: Some(score),
            verdict: if score > t_patch {
                Verdict::Correct
            } else {
                Verdict::Incorrect
            },
            source,
            evidence,
            error: None,
        }
    }

    pub fn abstain(patch_id: &str, source: Source) -> Self {
        Self {
            patch_id: patch_id.to_string(),
            score: None,
            verdict: Verdict::Abstain,
            source,
            evidence: Vec::new(),
            error: None,
        }
    }

    pub fn failed(patch_id: &str, source: Source, message: String) -> Self {
        Self {
            patch_id: patch_id.to_string(),
            score: None,
            verdict: Verdict::Error,
            source,
            evidence: Vec::new(),
            error: Some(message),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub t_test: f64,
    pub t_patch: f64,
    pub k: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            t_test: DEFAULT_T_TEST,
            t_patch: DEFAULT_T_PATCH,
            k: DEFAULT_K,
        }
    }
}

impl Thresholds {
    /// `t_patch` must lie in `[0,1]`; `t_test` may exceed 1 to disable
    /// retrieval entirely (a gate that nothing clears).
    pub fn new(t_test: f64, t_patch: f64, k: usize) -> Result<Self, PredictError> {
        if !(t_test.is_finite() && t_test >= 0.0) {
            return Err(PredictError::InvalidThresholds(format!("t_test {t_test}")));
        }
        if !(0.0..=1.0).contains(&t_patch) {
            return Err(PredictError::InvalidThresholds(format!("t_patch {t_patch}")));
        }
        if k == 0 {
            return Err(PredictError::InvalidThresholds("k must be positive".into()));
        }
        Ok(Self { t_test, t_patch, k })
    }
}

/// Patch-vs-reference score on a `[0,1]` scale. Cosine is mapped through
/// `(s + 1) / 2`; Euclidean similarity is already bounded.
pub fn patch_score(
    measure: SimilarityMeasure,
    candidate: &EmbeddingVector,
    reference: &EmbeddingVector,
) -> Result<f64, PredictError> {
    match measure {
        SimilarityMeasure::Cosine => Ok((cosine(candidate, reference)? + 1.0) / 2.0),
        SimilarityMeasure::EuclideanSim => Ok(euclidean_sim(candidate, reference)?),
        SimilarityMeasure::LevenshteinSim => Err(PredictError::UnsupportedMeasure(measure)),
    }
}

/// Everything a single prediction needs besides the candidate itself.
#[derive(Debug, Clone, Copy)]
pub struct PredictionContext<'a> {
    pub space: &'a SearchSpace<'a>,
    pub test_vecs: &'a VectorStore,
    pub patch_vecs: &'a VectorStore,
    pub thresholds: Thresholds,
    pub measure: SimilarityMeasure,
}

impl PredictionContext<'_> {
    pub fn neighbors<'f>(
        &self,
        failing_ids: impl IntoIterator<Item = &'f str>,
    ) -> Result<Vec<Neighbor>, PredictError> {
        Ok(retrieve_similar_tests(
            failing_ids,
            self.space,
            self.test_vecs,
            self.thresholds.k,
            self.thresholds.t_test,
        )?)
    }
}

/// Scores a candidate against the centroid of patches fixing similar tests.
pub fn predict_bats<'f>(
    candidate: &Patch,
    failing_ids: impl IntoIterator<Item = &'f str>,
    ctx: &PredictionContext<'_>,
) -> Result<PredictionRecord, PredictError> {
    if ctx.measure == SimilarityMeasure::LevenshteinSim {
        return Err(PredictError::UnsupportedMeasure(ctx.measure));
    }
    let cand = ctx.patch_vecs.require(&candidate.id)?;
    let neighbors = ctx.neighbors(failing_ids)?;
    if neighbors.is_empty() {
        return Ok(PredictionRecord::abstain(&candidate.id, Source::Bats));
    }
    let centroid = patch_centroid(&neighbors, ctx.patch_vecs)?;
    let score = patch_score(ctx.measure, cand, &centroid)?;
    Ok(PredictionRecord::decided(
        &candidate.id,
        score,
        ctx.thresholds.t_patch,
        Source::Bats,
        neighbors,
    ))
}

/// Test-agnostic baseline: compares against the mean of every correct
/// patch in the search space.
pub fn predict_baseline_history(
    candidate: &Patch,
    ctx: &PredictionContext<'_>,
) -> Result<PredictionRecord, PredictError> {
    let cand = ctx.patch_vecs.require(&candidate.id)?;
    let patches = ctx.space.distinct_patches();
    if patches.is_empty() {
        return Err(PredictError::EmptySearchSpace);
    }
    let vecs = patches
        .iter()
        .map(|p| ctx.patch_vecs.require(&p.id))
        .collect::<Result<Vec<_>, _>>()?;
    let mean = mean_vector(vecs).expect("non-empty");
    let score = patch_score(ctx.measure, cand, &mean)?;
    Ok(PredictionRecord::decided(
        &candidate.id,
        score,
        ctx.thresholds.t_patch,
        Source::BaselineHistory,
        Vec::new(),
    ))
}

/// Raw-string baseline: mean Levenshtein similarity between the candidate's
/// diff text and the diff texts of the retrieved patches.
pub fn predict_baseline_levenshtein(
    candidate: &Patch,
    neighbors: &[Neighbor],
    corpus: &Corpus,
    thresholds: &Thresholds,
) -> Result<PredictionRecord, PredictError> {
    let ids = distinct_patch_ids(neighbors);
    if ids.is_empty() {
        return Ok(PredictionRecord::abstain(&candidate.id, Source::BaselineLevenshtein));
    }
    let mut total = 0.0;
    for id in &ids {
        let p = corpus
            .patch(id)
            .ok_or_else(|| PredictError::UnknownPatch(id.to_string()))?;
        total += levenshtein_sim(&candidate.diff, &p.diff);
    }
    Ok(PredictionRecord::decided(
        &candidate.id,
        total / ids.len() as f64,
        thresholds.t_patch,
        Source::BaselineLevenshtein,
        neighbors.to_vec(),
    ))
}

/// Scored records by descending score (ties: ascending patch id), then the
/// unscored ones in input order.
pub fn rank_candidates(records: Vec<PredictionRecord>) -> Vec<PredictionRecord> {
    let (mut scored, unscored): (Vec<_>, Vec<_>) =
        records.into_iter().partition(|r| r.score.is_some());
    scored.sort_by(|a, b| {
        let (sa, sb) = (a.score.unwrap(), b.score.unwrap());
        sb.total_cmp(&sa).then_with(|| a.patch_id.cmp(&b.patch_id))
    });
    scored.extend(unscored);
    scored
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalPrediction {
    pub patch_id: String,
    pub verdict: Verdict,
    #[serde(default)]
    pub score: Option<f64>,
}

pub fn parse_external_predictions(
    text: &str,
) -> Result<IndexMap<String, ExternalPrediction>, PredictError> {
    let mut out = IndexMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| PredictError::ExternalParse { line: line_no, message };
        let rec: ExternalPrediction = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        if !rec.verdict.is_decided() {
            return Err(err(format!("verdict for {:?} must be correct or incorrect", rec.patch_id)));
        }
        if rec.score.is_some_and(|s| !s.is_finite()) {
            return Err(err(format!("non-finite score for {:?}", rec.patch_id)));
        }
        if out.contains_key(&rec.patch_id) {
            return Err(err(format!("duplicate patch id {:?}", rec.patch_id)));
        }
        out.insert(rec.patch_id.clone(), rec);
    }
    Ok(out)
}

pub fn load_external_predictions(
    path: impl AsRef<Path>,
) -> Result<IndexMap<String, ExternalPrediction>, PredictError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| PredictError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_external_predictions(&text)
}

/// Keeps every decided retrieval verdict and fills abstentions from the
/// external predictions. External records without a score get 1.0 for
/// `correct` and 0.0 for `incorrect`.
pub fn combine_predictions(
    bats: Vec<PredictionRecord>,
    external: &IndexMap<String, ExternalPrediction>,
) -> Result<Vec<PredictionRecord>, PredictError> {
    bats.into_iter()
        .map(|r| {
            if r.verdict != Verdict::Abstain {
                return Ok(r);
            }
            let ext = external
                .get(&r.patch_id)
                .ok_or_else(|| PredictError::MissingExternalPrediction(r.patch_id.clone()))?;
            let score = ext.score.unwrap_or(match ext.verdict {
                Verdict::Correct => 1.0,
                _ => 0.0,
            });
            Ok(PredictionRecord {
                patch_id: r.patch_id,
                score: Some(score),
                verdict: ext.verdict,
                source: Source::External,
                evidence: Vec::new(),
                error: None,
            })
        })
        .collect()
}

pub fn combine_with_external(
    bats: Vec<PredictionRecord>,
    external_path: impl AsRef<Path>,
) -> Result<Vec<PredictionRecord>, PredictError> {
    let external = load_external_predictions(external_path)?;
    combine_predictions(bats, &external)
}
