//! Patch-correctness triage guided by failing tests.
//!
//! Given a bug's failing tests and a candidate patch, the predictor finds
//! historical failing tests that look alike, collects the developer fixes
//! linked to them, and judges the candidate by how close it sits to the
//! centroid of those fixes. When no historical test is similar enough it
//! abstains.
//!
//! Modules, bottom up:
//!
//! * [`textprep`]: test tokenizer and unified-diff hunk parser.
//! * [`corpus`]: JSONL records, validation and leave-one-bug-out search spaces.
//! * [`embedding`]: the built-in hashing embedder and external vector stores.
//! * [`simindex`]: similarity measures and nearest-test retrieval.
//! * [`predictor`]: the predictor, two baselines and the external combiner.
//! * [`metrics`]: AUC, F1, ±Recall, MAP and MRR.
//! * [`clusterlab`]: bisecting K-means and cohesion analysis.
//! * [`synth`]: seeded synthetic corpora.
//! * [`cli`]: the commands behind the `patchtriage` binary.
//!
//! Runnable walkthroughs live in `examples/`.

pub mod cli;
pub mod clusterlab;
pub mod corpus;
pub mod embedding;
pub mod metrics;
pub mod predictor;
pub mod simindex;
pub mod synth;
pub mod textprep;

pub use corpus::{BugId, Corpus, Label, Link, Patch, Scope, TestCase};
pub use embedding::{EmbeddingProvider, EmbeddingVector, VectorStore};
pub use predictor::{PredictionRecord, Thresholds, Verdict};
pub use simindex::SimilarityMeasure;
