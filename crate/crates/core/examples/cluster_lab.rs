//! Bisecting K-means over synthetic failing tests, with cohesion scores
//! for the test clusters and the patch groups they induce.
//!
//! cargo run --release --example cluster_lab

use patchtriage::cli::{cluster_lab, KSpec, Pipeline};
use patchtriage::synth::{generate, SynthConfig};

fn main() {
    let data = generate(&SynthConfig::default());
    let families = data.families.iter().map(|(_, f)| f).max().unwrap() + 1;
    let pipeline = Pipeline::builtin(data.corpus, Vec::new(), 128, 42).unwrap();
    let ks: KSpec = format!("2..{}", families + 4).parse().unwrap();
    let report = cluster_lab(&pipeline.corpus, &pipeline.test_vecs, &pipeline.patch_vecs, &ks, 42).unwrap();

    println!("{} linked tests, {families} planted families\n", report.n_tests);
    println!("  k      SSE    CSC(tests)  CSC(patches)  qualified  pearson");
    for r in &report.reports {
        let t = r.tests.as_ref();
        let p = r.patches.as_ref();
        println!(
            "{:3} {:8.3}   {:>9}   {:>11}   {:>8}   {:>7}",
            r.k,
            r.sse,
            t.map_or("-".into(), |c| format!("{:.3}", c.csc)),
            p.map_or("-".into(), |c| format!("{:.3}", c.csc)),
            t.map_or("-".into(), |c| format!("{}/{}", c.qualified.0, c.qualified.1)),
            r.pearson_r.map_or("-".into(), |x| format!("{x:.3}")),
        );
    }
}
