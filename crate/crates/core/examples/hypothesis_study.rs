//! Are fixes of similar tests more alike than fixes in general?
//!
//! For every linked test, H compares its fix with the fix of the most
//! similar historical test and N averages its similarity to all other fixes.
//!
//! cargo run --release --example hypothesis_study

use patchtriage::cli::{hypothesis_study, Pipeline};
use patchtriage::synth::{generate, SynthConfig};
use patchtriage::Scope;

fn main() {
    let data = generate(&SynthConfig::default());
    let pipeline = Pipeline::builtin(data.corpus, Vec::new(), 128, 42).unwrap();
    for (scope, t_test) in [(Scope::AllProjects, None), (Scope::OtherProjectsOnly, None), (Scope::AllProjects, Some(0.95))] {
        let r = hypothesis_study(&pipeline.corpus, &pipeline.test_vecs, &pipeline.patch_vecs, scope, t_test).unwrap();
        println!("{scope:?}, t_test {t_test:?}");
        for p in &r.projects {
            println!(
                "  {:6} H n={:2} median {:>6}   N n={:2} median {:>6}",
                p.project,
                p.h.len(),
                p.median_h.map_or("-".into(), |x| format!("{x:.4}")),
                p.n.len(),
                p.median_n.map_or("-".into(), |x| format!("{x:.4}")),
            );
        }
        println!(
            "  nearest test below {}: {}/{} ({:.1}%)\n",
            r.cutoff,
            r.below_cutoff,
            r.total_tests,
            100.0 * r.fraction_below
        );
    }
}
