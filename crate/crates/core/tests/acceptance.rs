//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Tolerances and time budgets are pinned below.

mod common;

use common::*;
use patchtriage::cli::{combine_run, hypothesis_study, Pipeline, PredictorKind};
use patchtriage::clusterlab::{bisecting_kmeans, bisecting_path, cluster_report, sse};
use patchtriage::corpus::{make_search_space, BugId, Label, Patch};
use patchtriage::metrics::{auc, average_precision, f1, map_mrr, neg_recall, pos_recall, reciprocal_rank, Class, LabeledScore};
use patchtriage::predictor::ExternalPrediction;
use patchtriage::simindex::retrieve_similar_tests;
use patchtriage::synth::{generate, SynthConfig};
use patchtriage::{Scope, SimilarityMeasure, Thresholds, Verdict};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

const RANK_TOL: f64 = 1e-12;
const METRIC_BUDGET: Duration = Duration::from_secs(10);
const HUNK_BUDGET: Duration = Duration::from_secs(5);
const END_TO_END_BUDGET: Duration = Duration::from_secs(30);
const BATS_MIN_AUC: f64 = 0.9;
/// Above every nearest-test similarity the synthetic generator produces.
const ABOVE_CEILING: f64 = 0.95;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn metric_oracle_equivalence() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut instances = 0;
    for _ in 0..1000 {
        let items = random_items(&mut rng, 200);
        let c = counts(&items);
        let tp_fn = c.tp + c.fn_;
        let tn_fp = c.tn + c.fp;

        let got = pos_recall(&items).ok();
        let want = (tp_fn > 0).then(|| c.tp as f64 / tp_fn as f64);
        ensure(got == want, || format!("+Recall {got:?} vs {want:?}"))?;
        let got = neg_recall(&items).ok();
        let want = (tn_fp > 0).then(|| c.tn as f64 / tn_fp as f64);
        ensure(got == want, || format!("-Recall {got:?} vs {want:?}"))?;
        let got = f1(&items).ok().map(|f| f.value);
        let want = (tp_fn > 0).then(|| (2 * c.tp) as f64 / (2 * c.tp + c.fp + c.fn_) as f64);
        ensure(got == want, || format!("F1 {got:?} vs {want:?}"))?;
        if let (Some(g), true) = (got, c.tp > 0) {
            let p = c.tp as f64 / (c.tp + c.fp) as f64;
            let r = c.tp as f64 / tp_fn as f64;
            ensure((g - 2.0 * p * r / (p + r)).abs() <= RANK_TOL, || "F1 harmonic form".into())?;
        }

        match (auc(&items).ok(), auc_pairs(&items)) {
            (Some(g), Some(w)) => ensure((g - w).abs() <= RANK_TOL, || format!("AUC {g} vs {w}"))?,
            (None, None) => {}
            (g, w) => return Err(format!("AUC definedness {g:?} vs {w:?}")),
        }

        // per-bug lists: chunk the items and rank by score
        let mut lists = Vec::new();
        for chunk in items.chunks(rng.gen_range(1..8)) {
            let mut ranked: Vec<&LabeledScore> = chunk.iter().collect();
            ranked.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.patch_id.cmp(&b.patch_id)));
            lists.push(ranked.iter().map(|i| i.label == Class::Correct).collect::<Vec<bool>>());
        }
        let aps: Vec<f64> = lists.iter().filter_map(|l| ap_direct(l)).collect();
        let rrs: Vec<f64> = lists.iter().filter_map(|l| rr_direct(l)).collect();
        for l in &lists {
            let ap_ok = match (average_precision(l), ap_direct(l)) {
                (Some(g), Some(w)) => (g - w).abs() <= RANK_TOL,
                (g, w) => g == w,
            };
            ensure(ap_ok, || format!("AP of {l:?}"))?;
            ensure(reciprocal_rank(l) == rr_direct(l), || "RR".into())?;
        }
        match map_mrr(&lists) {
            Ok((map, mrr)) => {
                let wm = aps.iter().sum::<f64>() / aps.len() as f64;
                let wr = rrs.iter().sum::<f64>() / rrs.len() as f64;
                ensure((map - wm).abs() <= RANK_TOL && (mrr - wr).abs() <= RANK_TOL, || format!("MAP/MRR {map},{mrr} vs {wm},{wr}"))?;
            }
            Err(_) => ensure(aps.is_empty(), || "MAP undefined with relevant items".into())?,
        }
        instances += 1;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < METRIC_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{instances} instances, {elapsed:.2?}"))
}

fn hand_checked_metric_points() -> Check {
    let ap = average_precision(&[true, false, true]).unwrap();
    ensure((ap - 5.0 / 6.0).abs() <= RANK_TOL, || format!("AP([1,0,1]) = {ap}"))?;
    let (_, mrr) = map_mrr(&[vec![false, true, false]]).unwrap();
    ensure(mrr == 0.5, || format!("MRR = {mrr}"))?;
    let item = |s: f64, label| LabeledScore {
        patch_id: format!("{s}"),
        score: s,
        label,
        verdict: label,
    };
    let a = auc(&[
        item(0.9, Class::Correct),
        item(0.4, Class::Correct),
        item(0.6, Class::Incorrect),
        item(0.2, Class::Incorrect),
    ])
    .unwrap();
    ensure(a == 0.75, || format!("AUC = {a}"))?;
    Ok(format!("AP {ap:.4}, MRR {mrr}, AUC {a}"))
}

fn hunk_order_invariance() -> Check {
    let start = Instant::now();
    let data = generate(&SynthConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let bugs: Vec<BugId> = data.families.iter().map(|(b, _)| b.clone()).collect();
    let vocab = ["if", "null", "return", "value", "getX", "size", "index", "0", "1", "!=", "&&", "result", "count"];
    let mut candidates = Vec::new();
    for i in 0..500 {
        let n_hunks = rng.gen_range(2..6);
        let hunks: Vec<Vec<(char, String)>> = (0..n_hunks)
            .map(|_| {
                (0..rng.gen_range(1..4))
                    .map(|_| {
                        let m = if rng.gen_bool(0.5) { '+' } else { '-' };
                        let words: Vec<&str> = (0..rng.gen_range(2..7)).map(|_| *vocab.choose(&mut rng).unwrap()).collect();
                        (m, format!("    {};", words.join(" ")))
                    })
                    .collect()
            })
            .collect();
        let mut permuted = hunks.clone();
        while n_hunks > 1 && permuted == hunks {
            permuted.shuffle(&mut rng);
        }
        let bug = bugs[i % bugs.len()].clone();
        for (tag, h) in [("a", &hunks), ("b", &permuted)] {
            candidates.push(Patch::from_diff(format!("rand{i}{tag}"), bug.clone(), "random", Label::Unlabeled, render_diff(h)).unwrap());
        }
    }
    let pipeline = Pipeline::builtin(data.corpus, candidates, 128, 42).map_err(|e| e.to_string())?;
    for t_test in [0.0, 0.8] {
        let th = Thresholds::new(t_test, 0.5, 5).unwrap();
        let records = pipeline.predict(th, SimilarityMeasure::Cosine, Scope::AllProjects, PredictorKind::Bats);
        for pair in records.chunks(2) {
            let (a, b) = (&pair[0], &pair[1]);
            ensure(a.verdict == b.verdict && a.score.map(f64::to_bits) == b.score.map(f64::to_bits), || {
                format!("{} vs {}: {:?}/{:?} vs {:?}/{:?}", a.patch_id, b.patch_id, a.verdict, a.score, b.verdict, b.score)
            })?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < HUNK_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("500 patches x 2 thresholds bitwise equal, {elapsed:.2?}"))
}

fn retrieval_monotonicity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    let mut totals = [0usize; 3];
    for round in 0..50 {
        let (n_bugs, dim) = (rng.gen_range(4..20), rng.gen_range(2..6));
        let fx = random_fixture(&mut rng, n_bugs, &["A", "B", "C"], dim);
        let k = rng.gen_range(1..8);
        for scope in [Scope::AllProjects, Scope::OtherProjectsOnly] {
            let mut per_t = Vec::new();
            for (ti, t) in [0.0, 0.6, 0.9].into_iter().enumerate() {
                let mut abstain = 0;
                let mut sets = Vec::new();
                for cand in &fx.candidates {
                    let space = make_search_space(&fx.corpus, &cand.bug, scope);
                    let failing = fx.corpus.tests_of_bug(&cand.bug).map(|t| t.id.as_str());
                    let ns = retrieve_similar_tests(failing, &space, &fx.test_vecs, k, t).map_err(|e| e.to_string())?;
                    if ns.is_empty() {
                        abstain += 1;
                    }
                    totals[ti] += ns.len();
                    sets.push(ns.into_iter().map(|n| n.test_id).collect::<std::collections::BTreeSet<_>>());
                }
                per_t.push((sets, abstain));
            }
            for w in per_t.windows(2) {
                for (lo, hi) in w[0].0.iter().zip(&w[1].0) {
                    ensure(hi.is_subset(lo), || format!("round {round}: {hi:?} not within {lo:?}"))?;
                }
                ensure(w[1].1 >= w[0].1, || format!("round {round}: abstains decreased"))?;
                checked += 1;
            }
        }
    }
    Ok(format!(
        "{checked} threshold steps over 50 random fixtures; neighbors at 0.0/0.6/0.9: {}/{}/{}",
        totals[0], totals[1], totals[2]
    ))
}

fn clustering_correctness() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // planted blobs: centers 10·e_i, points within radius 1
    for (n_blobs, per_blob) in [(2, 32), (4, 16), (2, 5), (4, 10)] {
        for trial in 0..10 {
            let centers: Vec<Vec<f64>> = (0..n_blobs)
                .map(|i| {
                    let mut c = vec![0.0; 4];
                    c[i] = 10.0;
                    c
                })
                .collect();
            let (pts, planted) = blobs(&mut rng, &centers, per_blob, 1.0);
            ensure(pts.len() <= 64, || "fixture too large".into())?;
            let store = store_of(&pts);
            let got = bisecting_kmeans(&store, n_blobs, trial).map_err(|e| e.to_string())?;
            ensure(canonical(got.partition.labels()) == canonical(&planted), || format!("{n_blobs} blobs trial {trial}: planted partition not recovered"))?;
        }
    }

    // brute-force optimum on ≤10 points
    let mut oracle_cases = 0;
    for trial in 0..30u64 {
        let k = rng.gen_range(2..=4);
        let n = rng.gen_range(k + 1..=10);
        let centers: Vec<Vec<f64>> = (0..k).map(|i| vec![12.0 * i as f64, rng.gen_range(-30.0..30.0)]).collect();
        let mut pts = Vec::new();
        for i in 0..n {
            let c = &centers[i % k];
            pts.push(c.iter().map(|x| x + rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>());
        }
        let store = store_of(&pts);
        let got = bisecting_kmeans(&store, k, trial).map_err(|e| e.to_string())?;
        let (best, best_sse) = optimal_partition(&pts, k);
        let got_sse = sse(&got.partition, &store).map_err(|e| e.to_string())?;
        ensure(canonical(got.partition.labels()) == canonical(&best), || format!("oracle trial {trial}: sse {got_sse} vs optimum {best_sse}"))?;
        oracle_cases += 1;
    }

    // SSE curve and SC range on random fixtures
    let mut entities = 0;
    for trial in 0..20u64 {
        let n = rng.gen_range(3..40);
        let dim = rng.gen_range(1..6);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let store = store_of(&pts);
        let path = bisecting_path(&store, n.min(12), trial).map_err(|e| e.to_string())?;
        let curve: Vec<f64> = path.iter().map(|c| sse(&c.partition, &store).unwrap()).collect();
        ensure(curve.windows(2).all(|w| w[1] <= w[0] + 1e-12), || format!("SSE curve rises: {curve:?}"))?;
        for c in &path[1..] {
            let r = cluster_report(&c.partition, &store).map_err(|e| e.to_string())?;
            ensure(r.sc.values().all(|s| (-1.0..=1.0).contains(s)), || "SC out of [-1,1]".into())?;
            entities += r.sc.len();
        }
    }
    Ok(format!("blobs recovered, {oracle_cases} brute-force matches, {entities} SC values in range"))
}

fn synthetic_end_to_end() -> Check {
    let start = Instant::now();
    let data = generate(&SynthConfig::default());
    ensure(data.families.len() == 40, || "expected 40 bugs".into())?;
    let pipeline = Pipeline::builtin(data.corpus, data.candidates, 128, 42).map_err(|e| e.to_string())?;
    let report = |t: f64, p: PredictorKind| {
        let records = pipeline.predict(Thresholds::new(t, 0.5, 5).unwrap(), SimilarityMeasure::Cosine, Scope::AllProjects, p);
        pipeline.evaluate(&records)
    };
    let bats_08 = report(0.8, PredictorKind::Bats);
    let bats_00 = report(0.0, PredictorKind::Bats);
    let hist = report(0.8, PredictorKind::History);
    let (a, h) = (bats_08.auc.ok_or("BATS AUC undefined")?, hist.auc.ok_or("history AUC undefined")?);
    ensure(a >= BATS_MIN_AUC, || format!("BATS AUC {a:.4} < {BATS_MIN_AUC}"))?;
    ensure(a > h, || format!("BATS AUC {a:.4} not above history {h:.4}"))?;
    let (r08, r00) = (bats_08.pos_recall.ok_or("+Recall@0.8 undefined")?, bats_00.pos_recall.ok_or("+Recall@0.0 undefined")?);
    ensure(r08 >= r00, || format!("+Recall {r08} at 0.8 below {r00} at 0.0"))?;
    let elapsed = start.elapsed();
    ensure(elapsed < END_TO_END_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("BATS AUC {a:.4} vs history {h:.4}; +Recall {r08:.3} at 0.8, {r00:.3} at 0.0; {elapsed:.2?}"))
}

fn scenario_h_vs_n() -> Check {
    let data = generate(&SynthConfig::default());
    let pipeline = Pipeline::builtin(data.corpus, Vec::new(), 128, 42).map_err(|e| e.to_string())?;
    let r = hypothesis_study(&pipeline.corpus, &pipeline.test_vecs, &pipeline.patch_vecs, Scope::AllProjects, None)
        .map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    for p in &r.projects {
        let (h, n) = (p.median_h.ok_or("empty H")?, p.median_n.ok_or("empty N")?);
        ensure(h > n, || format!("{}: median H {h:.4} <= median N {n:.4}", p.project))?;
        lines.push(format!("{} {h:.3}>{n:.3}", p.project));
    }

    let hi = hypothesis_study(&pipeline.corpus, &pipeline.test_vecs, &pipeline.patch_vecs, Scope::AllProjects, Some(ABOVE_CEILING))
        .map_err(|e| e.to_string())?;
    ensure(hi.below_cutoff == hi.total_tests, || format!("a nearest test reaches {ABOVE_CEILING}"))?;
    ensure(hi.projects.iter().all(|p| p.h.is_empty()), || "H not empty above the ceiling".into())?;
    Ok(format!("{}; H empty at t_test {ABOVE_CEILING}", lines.join(", ")))
}

fn levenshtein_ablation() -> Check {
    let data = generate(&SynthConfig::default());
    let pipeline = Pipeline::builtin(data.corpus, data.candidates, 128, 42).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for t in [0.0, 0.8] {
        let auc_of = |p| {
            let records = pipeline.predict(Thresholds::new(t, 0.5, 5).unwrap(), SimilarityMeasure::Cosine, Scope::AllProjects, p);
            pipeline.evaluate(&records).auc
        };
        let (b, l) = (auc_of(PredictorKind::Bats).ok_or("BATS AUC undefined")?, auc_of(PredictorKind::Levenshtein).ok_or("Levenshtein AUC undefined")?);
        ensure(l < b, || format!("t_test {t}: Levenshtein AUC {l:.4} >= BATS {b:.4}"))?;
        out.push(format!("t_test {t}: {l:.4} < {b:.4}"));
    }
    Ok(out.join("; "))
}

fn combiner_conservation() -> Check {
    let data = generate(&SynthConfig::default());
    let external = data
        .candidates
        .iter()
        .map(|c| {
            let verdict = if c.id.len() % 2 == 0 { Verdict::Correct } else { Verdict::Incorrect };
            (c.id.clone(), ExternalPrediction { patch_id: c.id.clone(), verdict, score: None })
        })
        .collect();
    let ids: Vec<String> = data.candidates.iter().map(|c| c.id.clone()).collect();
    let pipeline = Pipeline::builtin(data.corpus, data.candidates, 128, 42).map_err(|e| e.to_string())?;
    let mut fractions = Vec::new();
    for gate in [1.01, 0.0, 0.8] {
        let run = combine_run(&pipeline, &external, gate, 0.5, 5, SimilarityMeasure::Cosine, Scope::AllProjects).map_err(|e| e.to_string())?;
        let got: Vec<&str> = run.records.iter().map(|r| r.patch_id.as_str()).collect();
        ensure(got == ids, || format!("gate {gate}: patches not covered exactly once"))?;
        ensure(run.records.iter().all(|r| r.verdict.is_decided()), || format!("gate {gate}: undecided record"))?;
        let s = &run.summary;
        ensure((s.fraction_bats + s.fraction_external - 1.0).abs() < 1e-12, || "fractions do not sum to 1".into())?;
        fractions.push((gate, s.fraction_bats));
    }
    ensure(fractions[0].1 == 0.0, || format!("gate 1.01: {} handled by retrieval", fractions[0].1))?;
    ensure(fractions[1].1 == 1.0, || format!("gate 0.0: {} handled by retrieval", fractions[1].1))?;
    Ok(fractions.iter().map(|(g, f)| format!("gate {g}: {:.1}% retrieval", 100.0 * f)).collect::<Vec<_>>().join(", "))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("metric oracle equivalence", metric_oracle_equivalence),
        ("hand-checked metric points", hand_checked_metric_points),
        ("hunk-order invariance", hunk_order_invariance),
        ("retrieval monotonicity", retrieval_monotonicity),
        ("clustering correctness", clustering_correctness),
        ("synthetic end-to-end trend", synthetic_end_to_end),
        ("scenario H vs N", scenario_h_vs_n),
        ("levenshtein ablation", levenshtein_ablation),
        ("combiner conservation", combiner_conservation),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("\nacceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
