//! Routing patches whose tests have no close historical match to an
//! external predictor, at several gates.
//!
//! cargo run --release --example combine_external

use indexmap::IndexMap;
use patchtriage::cli::{combine_run, Pipeline};
use patchtriage::predictor::ExternalPrediction;
use patchtriage::synth::{generate, SynthConfig};
use patchtriage::{Label, Scope, SimilarityMeasure, Verdict};

fn main() {
    let data = generate(&SynthConfig::default());
    // a stand-in external predictor that always says "correct"
    let external: IndexMap<String, ExternalPrediction> = data
        .candidates
        .iter()
        .map(|c| {
            let p = ExternalPrediction {
                patch_id: c.id.clone(),
                verdict: Verdict::Correct,
                score: Some(0.6),
            };
            (c.id.clone(), p)
        })
        .collect();
    let pipeline = Pipeline::builtin(data.corpus, data.candidates, 128, 42).unwrap();

    println!(" gate  bats  external  accuracy");
    for gate in [0.0, 0.6, 0.8, 0.85, 0.9, 1.01] {
        let run = combine_run(&pipeline, &external, gate, 0.5, 5, SimilarityMeasure::Cosine, Scope::AllProjects).unwrap();
        let labels = pipeline.labels();
        let right = run
            .records
            .iter()
            .filter(|r| match labels[&r.patch_id] {
                Label::Correct => r.verdict == Verdict::Correct,
                Label::Incorrect => r.verdict == Verdict::Incorrect,
                Label::Unlabeled => false,
            })
            .count();
        println!(
            "{gate:5.2}  {:4.0}%  {:7.0}%  {:7.1}%",
            100.0 * run.summary.fraction_bats,
            100.0 * run.summary.fraction_external,
            100.0 * right as f64 / run.summary.total as f64
        );
    }
}
