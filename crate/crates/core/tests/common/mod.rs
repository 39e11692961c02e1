//! Independent oracles and fixture builders shared by the integration tests.
#![allow(dead_code)]

use patchtriage::corpus::{BugId, Corpus, Label, Link, Patch, TestCase};
use patchtriage::metrics::{Class, LabeledScore};
use patchtriage::{EmbeddingVector, VectorStore};
use rand::Rng;

// ---- metric oracles -------------------------------------------------------

/// AUC by counting every (positive, negative) pair.
pub fn auc_pairs(items: &[LabeledScore]) -> Option<f64> {
    let pos: Vec<f64> = items.iter().filter(|i| i.label == Class::Correct).map(|i| i.score).collect();
    let neg: Vec<f64> = items.iter().filter(|i| i.label == Class::Incorrect).map(|i| i.score).collect();
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    let mut doubled = 0u64;
    for p in &pos {
        for n in &neg {
            doubled += if p > n { 2 } else if p == n { 1 } else { 0 };
        }
    }
    Some(doubled as f64 / (2 * pos.len() * neg.len()) as f64)
}

pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

pub fn counts(items: &[LabeledScore]) -> Counts {
    let n = |l: Class, v: Class| items.iter().filter(|i| i.label == l && i.verdict == v).count();
    Counts {
        tp: n(Class::Correct, Class::Correct),
        fp: n(Class::Incorrect, Class::Correct),
        tn: n(Class::Incorrect, Class::Incorrect),
        fn_: n(Class::Correct, Class::Incorrect),
    }
}

/// AP as the mean, over relevant positions, of precision at that cut-off,
/// each prefix counted from scratch.
pub fn ap_direct(list: &[bool]) -> Option<f64> {
    let relevant: Vec<usize> = (0..list.len()).filter(|&j| list[j]).collect();
    if relevant.is_empty() {
        return None;
    }
    let total: f64 = relevant
        .iter()
        .map(|&j| list[..=j].iter().filter(|&&r| r).count() as f64 / (j + 1) as f64)
        .sum();
    Some(total / relevant.len() as f64)
}

pub fn rr_direct(list: &[bool]) -> Option<f64> {
    (0..list.len()).find(|&j| list[j]).map(|j| 1.0 / (j + 1) as f64)
}

pub fn random_items(rng: &mut impl Rng, max_len: usize) -> Vec<LabeledScore> {
    let n = rng.gen_range(1..=max_len);
    // coarse grid so ties are common
    let grid = rng.gen_range(2..50);
    (0..n)
        .map(|i| {
            let label = if rng.gen_bool(0.5) { Class::Correct } else { Class::Incorrect };
            let verdict = if rng.gen_bool(0.5) { Class::Correct } else { Class::Incorrect };
            LabeledScore {
                patch_id: format!("p{i}"),
                score: rng.gen_range(0..=grid) as f64 / grid as f64,
                label,
                verdict,
            }
        })
        .collect()
}

// ---- clustering oracle ----------------------------------------------------

pub fn sse_of(points: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let dim = points[0].len();
    let mut total = 0.0;
    for c in 0..k {
        let members: Vec<&Vec<f64>> = points.iter().zip(labels).filter(|(_, &l)| l == c).map(|(p, _)| p).collect();
        if members.is_empty() {
            continue;
        }
        let mean: Vec<f64> = (0..dim)
            .map(|d| members.iter().map(|p| p[d]).sum::<f64>() / members.len() as f64)
            .collect();
        total += members
            .iter()
            .map(|p| p.iter().zip(&mean).map(|(a, b)| (a - b).powi(2)).sum::<f64>())
            .sum::<f64>();
    }
    total
}

/// Minimum-SSE partition into exactly `k` non-empty clusters, by
/// enumerating restricted growth strings.
pub fn optimal_partition(points: &[Vec<f64>], k: usize) -> (Vec<usize>, f64) {
    let n = points.len();
    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut labels = vec![0usize; n];
    fn rec(
        i: usize,
        used: usize,
        k: usize,
        labels: &mut Vec<usize>,
        points: &[Vec<f64>],
        best: &mut Option<(Vec<usize>, f64)>,
    ) {
        let n = labels.len();
        if n - i < k - used {
            return;
        }
        if i == n {
            let s = sse_of(points, labels, k);
            if best.as_ref().is_none_or(|b| s < b.1) {
                *best = Some((labels.clone(), s));
            }
            return;
        }
        for c in 0..=used.min(k - 1) {
            labels[i] = c;
            rec(i + 1, used.max(c + 1), k, labels, points, best);
        }
    }
    rec(0, 0, k, &mut labels, points, &mut best);
    best.expect("n >= k")
}

/// Canonical form of a labeling: clusters renumbered by first appearance.
pub fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

/// `per_blob` points around each of `centers`, uniformly within `radius`
/// per coordinate.
pub fn blobs(rng: &mut impl Rng, centers: &[Vec<f64>], per_blob: usize, radius: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut pts = Vec::new();
    let mut labels = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per_blob {
            let offset: Vec<f64> = center.iter().map(|x| x + rng.gen_range(-radius..radius) / (center.len() as f64).sqrt()).collect();
            pts.push(offset);
            labels.push(c);
        }
    }
    (pts, labels)
}

pub fn store_of(points: &[Vec<f64>]) -> VectorStore {
    let mut s = VectorStore::new("fixture", points[0].len());
    for (i, p) in points.iter().enumerate() {
        s.insert(format!("e{i:03}"), EmbeddingVector::new(p.clone()).unwrap());
    }
    s
}

// ---- corpus fixtures ------------------------------------------------------

pub fn vector(rng: &mut impl Rng, center: &[f64], noise: f64) -> EmbeddingVector {
    EmbeddingVector::new(center.iter().map(|c| c + rng.gen_range(-noise..noise)).collect()).unwrap()
}

/// A random corpus of `n_bugs` bugs over `projects`, with one to three tests
/// per bug and external vectors drawn around a handful of centers, so
/// similarities span the whole range.
pub struct RandomFixture {
    pub corpus: Corpus,
    pub candidates: Vec<Patch>,
    pub test_vecs: VectorStore,
    pub patch_vecs: VectorStore,
}

pub fn random_fixture(rng: &mut impl Rng, n_bugs: usize, projects: &[&str], dim: usize) -> RandomFixture {
    let n_centers = rng.gen_range(2..5);
    let centers: Vec<Vec<f64>> = (0..n_centers)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut tests = Vec::new();
    let mut patches = Vec::new();
    let mut links = Vec::new();
    let mut candidates = Vec::new();
    let mut tv = VectorStore::new("fixture", dim);
    let mut pv = VectorStore::new("fixture", dim);
    for b in 0..n_bugs {
        let project = projects[rng.gen_range(0..projects.len())];
        let bug = BugId::new(project, b as u32 + 1).unwrap();
        let center = &centers[rng.gen_range(0..n_centers)];
        let pid = format!("{bug}-dev");
        for t in 0..rng.gen_range(1..=3) {
            let id = format!("{bug}::t{t}");
            tv.insert(id.clone(), vector(rng, center, 0.3));
            tests.push(TestCase {
                id: id.clone(),
                bug: bug.clone(),
                name: format!("t{t}"),
                source: format!("void t{t}() {{ check{b}(); }}"),
            });
            links.push(Link {
                test_id: id,
                patch_id: pid.clone(),
            });
        }
        pv.insert(pid.clone(), vector(rng, center, 0.3));
        patches.push(
            Patch::from_diff(&pid, bug.clone(), "developer", Label::Correct, format!("+fix{b}();\n")).unwrap(),
        );
        for c in 0..2 {
            let cid = format!("{bug}-c{c}");
            let label = if c == 0 { Label::Correct } else { Label::Incorrect };
            let cv = if c == 0 {
                vector(rng, center, 0.3)
            } else {
                let other = rng.gen_range(0..n_centers);
                vector(rng, &centers[other], 0.6)
            };
            pv.insert(cid.clone(), cv);
            candidates.push(Patch::from_diff(cid, bug.clone(), "tool", label, format!("+cand{b}_{c}();\n")).unwrap());
        }
    }
    RandomFixture {
        corpus: Corpus::new(tests, patches, links).unwrap(),
        candidates,
        test_vecs: tv,
        patch_vecs: pv,
    }
}

/// Renders hunks as a unified diff, one `@@` section per hunk with a
/// context line on either side.
pub fn render_diff(hunks: &[Vec<(char, String)>]) -> String {
    let mut out = String::from("--- a/F.java\n+++ b/F.java\n");
    for (i, h) in hunks.iter().enumerate() {
        let removed = h.iter().filter(|(m, _)| *m == '-').count();
        let added = h.len() - removed;
        out.push_str(&format!("@@ -{0},{1} +{0},{2} @@\n", 10 * i + 1, removed + 2, added + 2));
        out.push_str(" ctx_before();\n");
        for (m, t) in h {
            out.push(*m);
            out.push_str(t);
            out.push('\n');
        }
        out.push_str(" ctx_after();\n");
    }
    out
}
