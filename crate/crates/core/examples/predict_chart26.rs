//! Two plausible repairs for a null-pointer crash in a chart axis.
//!
//! One adds a null guard, the other deletes the crashing statement. The
//! bug's failing test resembles historical tests whose fixes were null
//! guards, so the guard lands near their centroid and the deletion does not.
//! Vectors are given explicitly so the scores can be followed by hand.
//!
//! cargo run --example predict_chart26

use patchtriage::cli::{Pipeline, PredictorKind};
use patchtriage::corpus::{load_candidates, load_corpus};
use patchtriage::embedding::load_vector_store;
use patchtriage::{Scope, SimilarityMeasure, Thresholds};
use std::path::Path;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let corpus = load_corpus(dir.join("chart26_corpus.jsonl")).unwrap();
    let candidates = load_candidates(dir.join("chart26_candidates.jsonl")).unwrap();
    let tv = load_vector_store(dir.join("chart26_tests.jsonl")).unwrap();
    let pv = load_vector_store(dir.join("chart26_patches.jsonl")).unwrap();
    let pipeline = Pipeline::external(corpus, candidates, tv, pv).unwrap();

    let records = pipeline.predict(
        Thresholds::default(),
        SimilarityMeasure::Cosine,
        Scope::AllProjects,
        PredictorKind::Bats,
    );
    for r in &records {
        println!("{}: {:?} (score {:.4})", r.patch_id, r.verdict, r.score.unwrap_or(f64::NAN));
        for n in &r.evidence {
            println!("    via {} -> {} (test similarity {:.4})", n.test_id, n.patch_id, n.similarity);
        }
    }
    // centroid of (1,0,0) and (0.8,0.6,0) is (0.9,0.3,0)
    println!("\nexpected guard score    (√0.9 + 1) / 2       = {:.4}", (0.9f64.sqrt() + 1.0) / 2.0);
    println!("expected deletion score (-0.18/√0.9 + 1) / 2 = {:.4}", (-0.18 / 0.9f64.sqrt() + 1.0) / 2.0);
}
