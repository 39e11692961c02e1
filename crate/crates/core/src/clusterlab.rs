//! Hypothesis-validation lab: bisecting K-means over test vectors, patch
//! groupings induced by the test clusters, cohesion statistics, and the
//! "most similar test" versus "all patches" comparison.

use crate::corpus::{make_search_space, Corpus, Scope};
use crate::embedding::{EmbeddingVector, VectorStore};
use crate::simindex::{euclidean_sim, SimError};
use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use thiserror::Error;

const RESTARTS: usize = 5;
const MAX_ITER: usize = 100;
const SHIFT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("cannot form {k} clusters from {n} points")]
    TooFewPoints { k: usize, n: usize },
    #[error("k must be positive")]
    ZeroClusters,
    #[error("similarity coefficient undefined: no entity outside the cluster of {0:?}")]
    DegenerateClustering(String),
    #[error("entity {0:?} is not part of the clustering")]
    UnknownEntity(String),
    #[error("test {0:?} has no linked patch")]
    UnlinkedTest(String),
    #[error("correlation needs two equal-length series of at least 2 values")]
    BadSeries,
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("search space for test {0:?} is empty")]
    EmptyScope(String),
    #[error(transparent)]
    Similarity(#[from] SimError),
}

/// Assignment of entity ids to cluster indices `0..k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    ids: Vec<String>,
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn new(ids: Vec<String>, labels: Vec<usize>, k: usize) -> Self {
        assert_eq!(ids.len(), labels.len());
        assert!(labels.iter().all(|&l| l < k));
        Self { ids, labels, k }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id).map(|i| self.labels[i])
    }

    /// Member positions per cluster.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }

    /// Member ids per cluster, for manual inspection.
    pub fn member_ids(&self) -> Vec<Vec<String>> {
        self.members()
            .into_iter()
            .map(|m| m.into_iter().map(|i| self.ids[i].clone()).collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub partition: Partition,
    pub centroids: Vec<EmbeddingVector>,
}

impl Clustering {
    pub fn k(&self) -> usize {
        self.partition.k
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn mean_of(points: &[&[f64]], members: &[usize]) -> Vec<f64> {
    let dim = points[members[0]].len();
    let mut m = vec![0.0; dim];
    for &i in members {
        for (acc, x) in m.iter_mut().zip(points[i]) {
            *acc += x;
        }
    }
    let n = members.len() as f64;
    m.iter_mut().for_each(|v| *v /= n);
    m
}

fn cluster_sse(points: &[&[f64]], members: &[usize]) -> f64 {
    if members.len() < 2 {
        return 0.0;
    }
    let m = mean_of(points, members);
    members.iter().map(|&i| sq_dist(points[i], &m)).sum()
}

fn split_seed(seed: u64, iteration: usize) -> u64 {
    // splitmix64 finalizer over (seed, iteration)
    let mut z = seed ^ (iteration as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// k-means++ seeding for two centers.
fn init_two(points: &[&[f64]], members: &[usize], rng: &mut ChaCha8Rng) -> [Vec<f64>; 2] {
    let first = members[rng.gen_range(0..members.len())];
    let weights: Vec<f64> = members.iter().map(|&i| sq_dist(points[i], points[first])).collect();
    let total: f64 = weights.iter().sum();
    let second = if total > 0.0 {
        let mut target = rng.gen::<f64>() * total;
        let mut pick = members[members.len() - 1];
        for (&i, &w) in members.iter().zip(&weights) {
            if w > 0.0 && target < w {
                pick = i;
                break;
            }
            target -= w;
        }
        if weights[members.iter().position(|&m| m == pick).unwrap()] == 0.0 {
            // rounding walked past the end onto a zero-weight point
            members[weights.iter().rposition(|&w| w > 0.0).unwrap()]
        } else {
            pick
        }
    } else {
        first
    };
    [points[first].to_vec(), points[second].to_vec()]
}

/// Lloyd iterations for two centers; returns member lists (both non-empty).
fn lloyd_two(points: &[&[f64]], members: &[usize], mut centers: [Vec<f64>; 2]) -> [Vec<usize>; 2] {
    let mut sides: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for _ in 0..MAX_ITER {
        sides = [Vec::new(), Vec::new()];
        for &i in members {
            let d0 = sq_dist(points[i], &centers[0]);
            let d1 = sq_dist(points[i], &centers[1]);
            sides[usize::from(d1 < d0)].push(i);
        }
        if sides[0].is_empty() || sides[1].is_empty() {
            break;
        }
        let new = [mean_of(points, &sides[0]), mean_of(points, &sides[1])];
        let shift = (0..2)
            .map(|c| sq_dist(&new[c], &centers[c]).sqrt())
            .fold(0.0, f64::max);
        centers = new;
        if shift < SHIFT_TOL {
            break;
        }
    }
    // Degenerate split (e.g. coincident points): peel off the member
    // farthest from the occupied side's center so both sides are non-empty.
    if sides[1].is_empty() || sides[0].is_empty() {
        let (full, empty) = if sides[1].is_empty() { (0, 1) } else { (1, 0) };
        let m = mean_of(points, &sides[full]);
        let far = sides[full]
            .iter()
            .enumerate()
            .max_by(|(ia, &a), (ib, &b)| {
                sq_dist(points[a], &m)
                    .total_cmp(&sq_dist(points[b], &m))
                    .then(ia.cmp(ib))
            })
            .map(|(pos, _)| pos)
            .unwrap();
        let moved = sides[full].remove(far);
        sides[empty].push(moved);
    }
    sides
}

fn bisect(points: &[&[f64]], members: &[usize], seed: u64) -> [Vec<usize>; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<([Vec<usize>; 2], f64)> = None;
    for _ in 0..RESTARTS {
        let centers = init_two(points, members, &mut rng);
        let sides = lloyd_two(points, members, centers);
        let sse = cluster_sse(points, &sides[0]) + cluster_sse(points, &sides[1]);
        if best.as_ref().is_none_or(|(_, b)| sse < *b) {
            best = Some((sides, sse));
        }
    }
    let [mut a, mut b] = best.unwrap().0;
    a.sort_unstable();
    b.sort_unstable();
    // The side holding the lowest member keeps the parent's index.
    if b[0] < a[0] {
        std::mem::swap(&mut a, &mut b);
    }
    [a, b]
}

/// Every level `1..=k_max` of one bisection run. Level `j` refines level
/// `j-1` by splitting exactly one cluster.
pub fn bisecting_path(
    vecs: &VectorStore,
    k_max: usize,
    seed: u64,
) -> Result<Vec<Clustering>, ClusterError> {
    if k_max == 0 {
        return Err(ClusterError::ZeroClusters);
    }
    if vecs.len() < k_max {
        return Err(ClusterError::TooFewPoints {
            k: k_max,
            n: vecs.len(),
        });
    }
    let ids: Vec<String> = vecs.ids().map(str::to_string).collect();
    let points: Vec<&[f64]> = vecs.iter().map(|(_, v)| v.values()).collect();

    let mut clusters: Vec<Vec<usize>> = vec![(0..points.len()).collect()];
    let mut levels = vec![snapshot(&ids, &points, &clusters)];
    for iteration in 0..k_max - 1 {
        let target = clusters
            .iter()
            .enumerate()
            .filter(|(_, m)| m.len() >= 2)
            .map(|(i, m)| (i, cluster_sse(&points, m)))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .expect("fewer clusters than points implies a splittable cluster");
        let [keep, new] = bisect(&points, &clusters[target], split_seed(seed, iteration));
        clusters[target] = keep;
        clusters.push(new);
        levels.push(snapshot(&ids, &points, &clusters));
    }
    Ok(levels)
}

fn snapshot(ids: &[String], points: &[&[f64]], clusters: &[Vec<usize>]) -> Clustering {
    let mut labels = vec![0; ids.len()];
    for (c, members) in clusters.iter().enumerate() {
        for &i in members {
            labels[i] = c;
        }
    }
    Clustering {
        partition: Partition::new(ids.to_vec(), labels, clusters.len()),
        centroids: clusters
            .iter()
            .map(|m| EmbeddingVector::new(mean_of(points, m)).expect("finite mean"))
            .collect(),
    }
}

/// Bisecting K-means: repeatedly splits the highest-SSE cluster with a
/// seeded, restarted 2-means until `k` clusters exist.
pub fn bisecting_kmeans(vecs: &VectorStore, k: usize, seed: u64) -> Result<Clustering, ClusterError> {
    Ok(bisecting_path(vecs, k, seed)?.pop().expect("k >= 1"))
}

fn partition_points<'a>(p: &Partition, vecs: &'a VectorStore) -> Result<Vec<&'a [f64]>, ClusterError> {
    p.ids
        .iter()
        .map(|id| {
            vecs.get(id)
                .map(|v| v.values())
                .ok_or_else(|| ClusterError::UnknownEntity(id.clone()))
        })
        .collect()
}

/// Within-cluster sum of squared distances to each cluster's mean.
pub fn sse(p: &Partition, vecs: &VectorStore) -> Result<f64, ClusterError> {
    let points = partition_points(p, vecs)?;
    Ok(p.members().iter().map(|m| cluster_sse(&points, m)).sum())
}

/// `(in − out) / max(in, out)` from mean in-cluster and out-of-cluster
/// Euclidean similarities.
pub fn sc_from_in_out(in_sim: f64, out_sim: f64) -> f64 {
    let denom = in_sim.max(out_sim);
    if denom == 0.0 {
        return 0.0;
    }
    ((in_sim - out_sim) / denom).clamp(-1.0, 1.0)
}

struct SimMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SimMatrix {
    fn build(points: &[&[f64]]) -> Self {
        let n = points.len();
        let data: Vec<f64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                (0..n).map(move |j| 1.0 / (1.0 + sq_dist(points[i], points[j]).sqrt()))
            })
            .collect();
        Self { n, data }
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

fn sc_all(p: &Partition, points: &[&[f64]]) -> Result<Vec<f64>, ClusterError> {
    let sims = SimMatrix::build(points);
    let sizes: Vec<usize> = p.members().iter().map(Vec::len).collect();
    (0..p.ids.len())
        .map(|e| {
            let own = p.labels[e];
            let out_n = p.ids.len() - sizes[own];
            if out_n == 0 {
                return Err(ClusterError::DegenerateClustering(p.ids[e].clone()));
            }
            let (mut in_sum, mut out_sum) = (0.0, 0.0);
            for j in 0..p.ids.len() {
                if j == e {
                    continue;
                }
                if p.labels[j] == own {
                    in_sum += sims.get(e, j);
                } else {
                    out_sum += sims.get(e, j);
                }
            }
            let in_sim = if sizes[own] == 1 {
                1.0
            } else {
                in_sum / (sizes[own] - 1) as f64
            };
            Ok(sc_from_in_out(in_sim, out_sum / out_n as f64))
        })
        .collect()
}

/// Similarity coefficient of one entity.
pub fn similarity_coefficient(e: &str, p: &Partition, vecs: &VectorStore) -> Result<f64, ClusterError> {
    let points = partition_points(p, vecs)?;
    let idx = p
        .ids
        .iter()
        .position(|x| x == e)
        .ok_or_else(|| ClusterError::UnknownEntity(e.to_string()))?;
    let own = p.labels[idx];
    let mut in_sims = Vec::new();
    let mut out_sims = Vec::new();
    for (j, other) in points.iter().enumerate() {
        if j == idx {
            continue;
        }
        let s = 1.0 / (1.0 + sq_dist(points[idx], other).sqrt());
        if p.labels[j] == own {
            in_sims.push(s);
        } else {
            out_sims.push(s);
        }
    }
    if out_sims.is_empty() {
        return Err(ClusterError::DegenerateClustering(e.to_string()));
    }
    let in_sim = if in_sims.is_empty() {
        1.0
    } else {
        in_sims.iter().sum::<f64>() / in_sims.len() as f64
    };
    let out_sim = out_sims.iter().sum::<f64>() / out_sims.len() as f64;
    Ok(sc_from_in_out(in_sim, out_sim))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub k: usize,
    pub sse: f64,
    pub sc: IndexMap<String, f64>,
    pub csc: f64,
    /// Mean member SC per cluster; `None` for an empty cluster.
    pub cluster_sc: Vec<Option<f64>>,
    /// (clusters with mean SC > 0, k)
    pub qualified: (usize, usize),
}

pub fn cluster_report(p: &Partition, vecs: &VectorStore) -> Result<ClusterReport, ClusterError> {
    let points = partition_points(p, vecs)?;
    let sc = sc_all(p, &points)?;
    let cluster_sc: Vec<Option<f64>> = p
        .members()
        .iter()
        .map(|m| (!m.is_empty()).then(|| m.iter().map(|&i| sc[i]).sum::<f64>() / m.len() as f64))
        .collect();
    let qualified = cluster_sc.iter().flatten().filter(|&&s| s > 0.0).count();
    Ok(ClusterReport {
        k: p.k,
        sse: p.members().iter().map(|m| cluster_sse(&points, m)).sum(),
        csc: sc.iter().sum::<f64>() / sc.len() as f64,
        sc: p.ids.iter().cloned().zip(sc).collect(),
        cluster_sc,
        qualified: (qualified, p.k),
    })
}

/// Groups each linked patch with the test cluster holding most of its
/// tests (ties: lowest cluster index).
pub fn induced_patch_grouping(tests: &Partition, corpus: &Corpus) -> Result<Partition, ClusterError> {
    let mut votes: IndexMap<&str, Vec<usize>> = IndexMap::new();
    for (id, &label) in tests.ids.iter().zip(&tests.labels) {
        let patch = corpus
            .linked_patch(id)
            .ok_or_else(|| ClusterError::UnlinkedTest(id.clone()))?;
        votes.entry(patch.id.as_str()).or_insert_with(|| vec![0; tests.k])[label] += 1;
    }
    let (ids, labels) = votes
        .into_iter()
        .map(|(id, counts)| {
            let best = counts
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
                .map(|(c, _)| c)
                .unwrap();
            (id.to_string(), best)
        })
        .unzip();
    Ok(Partition::new(ids, labels, tests.k))
}

/// Sample Pearson correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, ClusterError> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(ClusterError::BadSeries);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(ClusterError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioScores {
    /// Similarity of a test's own patch to the patch of its most similar
    /// historical test.
    pub h: Vec<f64>,
    /// Mean similarity of a test's own patch to every patch in scope.
    pub n: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub projects: IndexMap<String, ScenarioScores>,
    /// Best historical-test similarity for every linked test, link order.
    pub nearest_test_similarity: Vec<f64>,
}

struct ScenarioRow {
    project: String,
    nearest: f64,
    h: Option<f64>,
    n: f64,
}

/// Scenario H vs. Scenario N scores, grouped by project.
pub fn scenario_h_vs_n(
    corpus: &Corpus,
    test_vecs: &VectorStore,
    patch_vecs: &VectorStore,
    scope: Scope,
    t_test: Option<f64>,
) -> Result<ScenarioReport, ClusterError> {
    let rows: Vec<ScenarioRow> = corpus
        .links()
        .par_iter()
        .map(|link| -> Result<ScenarioRow, ClusterError> {
            let test = corpus.test(&link.test_id).expect("validated link");
            let own = corpus.patch(&link.patch_id).expect("validated link");
            let tv = test_vecs.require(&test.id).map_err(SimError::from)?;
            let pv = patch_vecs.require(&own.id).map_err(SimError::from)?;
            let space = make_search_space(corpus, &test.bug, scope);

            let mut best: Option<(f64, &str, &str)> = None;
            for e in space.entries() {
                let s = euclidean_sim(tv, test_vecs.require(&e.test.id).map_err(SimError::from)?)?;
                let better = match best {
                    None => true,
                    Some((bs, bid, _)) => match s.total_cmp(&bs) {
                        Ordering::Greater => true,
                        Ordering::Equal => e.test.id.as_str() < bid,
                        Ordering::Less => false,
                    },
                };
                if better {
                    best = Some((s, e.test.id.as_str(), e.patch.id.as_str()));
                }
            }
            let (nearest, _, nearest_patch) =
                best.ok_or_else(|| ClusterError::EmptyScope(test.id.clone()))?;

            let h = if t_test.is_none_or(|t| nearest > t) {
                Some(euclidean_sim(
                    pv,
                    patch_vecs.require(nearest_patch).map_err(SimError::from)?,
                )?)
            } else {
                None
            };

            let others: Vec<_> = space
                .distinct_patches()
                .into_iter()
                .filter(|p| p.id != own.id)
                .collect();
            if others.is_empty() {
                return Err(ClusterError::EmptyScope(test.id.clone()));
            }
            let mut total = 0.0;
            for q in &others {
                total += euclidean_sim(pv, patch_vecs.require(&q.id).map_err(SimError::from)?)?;
            }
            Ok(ScenarioRow {
                project: test.bug.project().to_string(),
                nearest,
                h,
                n: total / others.len() as f64,
            })
        })
        .collect::<Result<_, _>>()?;

    let mut report = ScenarioReport::default();
    for row in rows {
        report.nearest_test_similarity.push(row.nearest);
        let entry = report.projects.entry(row.project).or_default();
        entry.h.extend(row.h);
        entry.n.push(row.n);
    }
    Ok(report)
}

/// Median of a sample; `None` when empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 0 {
        (v[mid - 1] + v[mid]) / 2.0
    } else {
        v[mid]
    })
}
