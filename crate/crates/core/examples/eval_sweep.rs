//! Threshold sweep on a synthetic corpus, comparing the test-guided
//! predictor with the history and edit-distance baselines.
//!
//! cargo run --release --example eval_sweep

use patchtriage::cli::{sweep_csv, sweep_rows, Pipeline, PredictorKind, DEFAULT_SWEEP};
use patchtriage::embedding::{DEFAULT_DIM, DEFAULT_SEED};
use patchtriage::synth::{generate, SynthConfig};
use patchtriage::{Scope, SimilarityMeasure, Thresholds};

fn main() {
    let data = generate(&SynthConfig::default());
    println!(
        "{} tests, {} developer patches, {} candidates",
        data.corpus.tests().len(),
        data.corpus.patches().len(),
        data.candidates.len()
    );
    let pipeline = Pipeline::builtin(data.corpus, data.candidates, DEFAULT_DIM, DEFAULT_SEED)
        .expect("synthetic data embeds");

    for predictor in [PredictorKind::Bats, PredictorKind::History, PredictorKind::Levenshtein] {
        let rows = sweep_rows(
            &pipeline,
            Thresholds::default(),
            SimilarityMeasure::Cosine,
            Scope::AllProjects,
            predictor,
            &DEFAULT_SWEEP,
        )
        .expect("default thresholds are valid");
        println!("\n{predictor:?}");
        print!("{}", sweep_csv(&rows));
    }
}
