//! Fixed-dimension vectors for tests and patches.
//!
//! Two providers exist. The built-in one is a signed feature-hashing bag of
//! tokens (FNV-1a-64), deterministic across platforms. The external one
//! reads vectors produced elsewhere from a JSONL interchange file.

use crate::corpus::{Patch, TestCase};
use crate::textprep::{tokenize_hunk, tokenize_test, TextError, TokenSeq};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

pub const DEFAULT_DIM: usize = 128;
pub const DEFAULT_SEED: u64 = 42;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("no tokens to embed")]
    EmptyTokens,
    #[error("no vector for {0:?}")]
    MissingVector(String),
    #[error("dimension must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("line {line}: expected dimension {expected}, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl From<TextError> for EmbeddingError {
    fn from(_: TextError) -> Self {
        EmbeddingError::EmptyTokens
    }
}

/// A non-empty vector of finite reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    /// `None` when empty or when any component is NaN/infinite.
    pub fn new(values: Vec<f64>) -> Option<Self> {
        (!values.is_empty() && values.iter().all(|v| v.is_finite())).then_some(Self(values))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn add_assign(&mut self, other: &EmbeddingVector) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.0 {
            *v *= factor;
        }
    }

    /// Lexicographic order under `f64::total_cmp`.
    fn total_cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

/// Componentwise mean; `None` for an empty input.
pub fn mean_vector<'a, I>(vectors: I) -> Option<EmbeddingVector>
where
    I: IntoIterator<Item = &'a EmbeddingVector>,
{
    let mut iter = vectors.into_iter();
    let mut acc = iter.next()?.clone();
    let mut n = 1usize;
    for v in iter {
        acc.add_assign(v);
        n += 1;
    }
    acc.scale(1.0 / n as f64);
    Some(acc)
}

fn fnv1a_seeded(bytes: &[u8], seed: u64) -> u64 {
    let mut h = FNV_OFFSET ^ seed;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Signed feature-hashing of a token bag, L2-normalized.
pub fn embed_tokens_builtin(
    tokens: &TokenSeq,
    dim: usize,
    seed: u64,
) -> Result<EmbeddingVector, EmbeddingError> {
    if dim < 2 {
        return Err(EmbeddingError::BadDimension(dim));
    }
    if tokens.is_empty() {
        return Err(EmbeddingError::EmptyTokens);
    }
    let mut acc = vec![0.0f64; dim];
    for token in tokens.iter() {
        let h = fnv1a_seeded(token.as_bytes(), seed);
        let bucket = (h % dim as u64) as usize;
        let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
        acc[bucket] += sign;
    }
    let norm = acc.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        acc[0] = 1.0;
    } else {
        for v in &mut acc {
            *v /= norm;
        }
    }
    Ok(EmbeddingVector(acc))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    BuiltinHash,
    ExternalFile,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingProvider {
    pub name: String,
    pub dim: usize,
    pub kind: ProviderKind,
    pub seed: u64,
}

impl EmbeddingProvider {
    pub fn builtin(dim: usize, seed: u64) -> Result<Self, EmbeddingError> {
        if dim < 2 {
            return Err(EmbeddingError::BadDimension(dim));
        }
        Ok(Self {
            name: format!("builtin-hash-{dim}"),
            dim,
            kind: ProviderKind::BuiltinHash,
            seed,
        })
    }

    /// A provider backed by `store`; takes its name and dimension.
    pub fn external(store: &VectorStore) -> Result<Self, EmbeddingError> {
        if store.dim() < 2 {
            return Err(EmbeddingError::BadDimension(store.dim()));
        }
        Ok(Self {
            name: store.provider().to_string(),
            dim: store.dim(),
            kind: ProviderKind::ExternalFile,
            seed: 0,
        })
    }

    pub fn embed_test(
        &self,
        test: &TestCase,
        store: Option<&VectorStore>,
    ) -> Result<EmbeddingVector, EmbeddingError> {
        match self.kind {
            ProviderKind::BuiltinHash => {
                embed_tokens_builtin(&tokenize_test(&test.source)?, self.dim, self.seed)
            }
            ProviderKind::ExternalFile => lookup(store, &test.id),
        }
    }

    /// Patch vector = sum of hunk vectors (not re-normalized).
    pub fn embed_patch(
        &self,
        patch: &Patch,
        store: Option<&VectorStore>,
    ) -> Result<EmbeddingVector, EmbeddingError> {
        match self.kind {
            ProviderKind::BuiltinHash => {
                let mut hunk_vecs = patch
                    .hunks
                    .iter()
                    .map(|h| embed_tokens_builtin(&tokenize_hunk(h), self.dim, self.seed))
                    .collect::<Result<Vec<_>, _>>()?;
                if hunk_vecs.is_empty() {
                    return Err(EmbeddingError::EmptyTokens);
                }
                // Canonical summation order keeps the sum bitwise independent
                // of hunk order.
                hunk_vecs.sort_by(EmbeddingVector::total_cmp);
                let mut sum = EmbeddingVector::zeros(self.dim);
                for v in &hunk_vecs {
                    sum.add_assign(v);
                }
                Ok(sum)
            }
            ProviderKind::ExternalFile => lookup(store, &patch.id),
        }
    }
}

fn lookup(store: Option<&VectorStore>, id: &str) -> Result<EmbeddingVector, EmbeddingError> {
    store
        .and_then(|s| s.get(id))
        .cloned()
        .ok_or_else(|| EmbeddingError::MissingVector(id.to_string()))
}

/// Entity id → vector, all of one dimension. Insertion order is kept.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorStore {
    provider: String,
    dim: usize,
    vectors: IndexMap<String, EmbeddingVector>,
}

#[derive(Deserialize, Serialize)]
struct VectorLine {
    id: String,
    vec: Vec<f64>,
}

impl VectorStore {
    pub fn new(provider: impl Into<String>, dim: usize) -> Self {
        Self {
            provider: provider.into(),
            dim,
            vectors: IndexMap::new(),
        }
    }

    pub fn provider(&self) -> &str {
        &self.provider
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&EmbeddingVector> {
        self.vectors.get(id)
    }

    pub fn require(&self, id: &str) -> Result<&EmbeddingVector, EmbeddingError> {
        self.get(id)
            .ok_or_else(|| EmbeddingError::MissingVector(id.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.vectors.contains_key(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &EmbeddingVector)> {
        self.vectors.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }

    /// Inserts or replaces. Panics on a dimension mismatch.
    pub fn insert(&mut self, id: impl Into<String>, v: EmbeddingVector) {
        assert_eq!(v.dim(), self.dim, "vector dimension differs from store");
        self.vectors.insert(id.into(), v);
    }

    /// A store holding only the given ids (missing ids are skipped).
    pub fn subset<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> VectorStore {
        let mut out = VectorStore::new(self.provider.clone(), self.dim);
        for id in ids {
            if let Some(v) = self.vectors.get(id) {
                out.vectors.insert(id.to_string(), v.clone());
            }
        }
        out
    }

    pub fn from_jsonl(provider: impl Into<String>, text: &str) -> Result<Self, EmbeddingError> {
        let mut dim = None;
        let mut vectors = IndexMap::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let rec: VectorLine =
                serde_json::from_str(line).map_err(|e| EmbeddingError::Parse {
                    line: line_no,
                    message: e.to_string(),
                })?;
            let expected = *dim.get_or_insert(rec.vec.len());
            if rec.vec.len() != expected {
                return Err(EmbeddingError::DimensionMismatch {
                    line: line_no,
                    expected,
                    found: rec.vec.len(),
                });
            }
            let v = EmbeddingVector::new(rec.vec).ok_or_else(|| EmbeddingError::Parse {
                line: line_no,
                message: format!("vector for {:?} is empty or not finite", rec.id),
            })?;
            if vectors.insert(rec.id.clone(), v).is_some() {
                return Err(EmbeddingError::Parse {
                    line: line_no,
                    message: format!("duplicate id {:?}", rec.id),
                });
            }
        }
        Ok(Self {
            provider: provider.into(),
            dim: dim.unwrap_or(0),
            vectors,
        })
    }

    /// Interchange JSONL, one `{"id","vec"}` per line in insertion order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (id, v) in &self.vectors {
            let line = serde_json::to_string(&VectorLine {
                id: id.clone(),
                vec: v.0.clone(),
            })
            .expect("finite vectors serialize");
            let _ = writeln!(out, "{line}");
        }
        out
    }
}

/// Loads a vector interchange file; the provider name is the file stem.
pub fn load_vector_store(path: impl AsRef<Path>) -> Result<VectorStore, EmbeddingError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| EmbeddingError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "external".to_string());
    VectorStore::from_jsonl(name, &text)
}
