//! Command implementations behind the `patchtriage` binary.
//!
//! Each `cmd_*` function does its work in memory and returns a report; the
//! binary only parses flags, writes outputs and maps errors to exit codes
//! (0 success, 1 I/O, 2 validation, 3 configuration or domain).

use crate::clusterlab::{
    bisecting_path, cluster_report, induced_patch_grouping, median, pearson, scenario_h_vs_n,
    ClusterError, ClusterReport,
};
use crate::corpus::{load_candidates, load_corpus, make_search_space, Corpus, CorpusError, Label, Patch, Scope};
use crate::embedding::{
    load_vector_store, EmbeddingError, EmbeddingProvider, VectorStore, DEFAULT_DIM, DEFAULT_SEED,
};
use crate::metrics::{evaluate, MetricReport, CSV_HEADER};
use crate::predictor::{
    combine_predictions, load_external_predictions, predict_baseline_history,
    predict_baseline_levenshtein, predict_bats, PredictError, PredictionContext, PredictionRecord,
    Source, Thresholds, Verdict, DEFAULT_T_PATCH,
};
use crate::simindex::{SimilarityMeasure, DEFAULT_K, DEFAULT_T_TEST};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::PathBuf;
use std::str::FromStr;
use thiserror::Error;

/// Thresholds evaluated by `eval` when no sweep is given.
pub const DEFAULT_SWEEP: [f64; 5] = [0.0, 0.6, 0.7, 0.8, 0.9];
/// Cut-off for the "nearest historical test is dissimilar" statistic when
/// `hypothesis` runs without `--t-test`.
pub const DEFAULT_DISSIMILAR_CUTOFF: f64 = 0.6;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Config(_) | CliError::Domain(_) => 3,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Io { .. } => CliError::Io(e.to_string()),
            CorpusError::Parse { .. } | CorpusError::Validation(_) => CliError::Validation(e.to_string()),
        }
    }
}

impl From<EmbeddingError> for CliError {
    fn from(e: EmbeddingError) -> Self {
        match e {
            EmbeddingError::Io { .. } => CliError::Io(e.to_string()),
            EmbeddingError::Parse { .. } | EmbeddingError::DimensionMismatch { .. } => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<PredictError> for CliError {
    fn from(e: PredictError) -> Self {
        match e {
            PredictError::Io { .. } => CliError::Io(e.to_string()),
            PredictError::ExternalParse { .. } => CliError::Validation(e.to_string()),
            PredictError::InvalidThresholds(_) => CliError::Config(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<ClusterError> for CliError {
    fn from(e: ClusterError) -> Self {
        CliError::Domain(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedderKind {
    #[default]
    Builtin,
    External,
}

impl FromStr for EmbedderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "builtin" => Ok(Self::Builtin),
            "external" => Ok(Self::External),
            other => Err(format!("unknown embedder {other:?}")),
        }
    }
}

/// Which scorer produces the verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictorKind {
    /// Test-guided retrieval.
    #[default]
    Bats,
    /// Mean of all historical correct patches, tests ignored.
    History,
    /// Raw diff-text edit distance to the retrieved patches.
    Levenshtein,
}

impl FromStr for PredictorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bats" => Ok(Self::Bats),
            "history" => Ok(Self::History),
            "levenshtein" => Ok(Self::Levenshtein),
            other => Err(format!("unknown predictor {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus_path: PathBuf,
    pub candidates_path: Option<PathBuf>,
    pub vectors_test_path: Option<PathBuf>,
    pub vectors_patch_path: Option<PathBuf>,
    pub embedder: EmbedderKind,
    pub dim: usize,
    pub seed: u64,
    pub measure: SimilarityMeasure,
    pub k: usize,
    pub t_test: f64,
    pub t_patch: f64,
    pub scope: Scope,
    pub output_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(corpus_path: impl Into<PathBuf>) -> Self {
        Self {
            corpus_path: corpus_path.into(),
            candidates_path: None,
            vectors_test_path: None,
            vectors_patch_path: None,
            embedder: EmbedderKind::Builtin,
            dim: DEFAULT_DIM,
            seed: DEFAULT_SEED,
            measure: SimilarityMeasure::Cosine,
            k: DEFAULT_K,
            t_test: DEFAULT_T_TEST,
            t_patch: DEFAULT_T_PATCH,
            scope: Scope::AllProjects,
            output_path: None,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let has_vecs = self.vectors_test_path.is_some() || self.vectors_patch_path.is_some();
        match self.embedder {
            EmbedderKind::External
                if self.vectors_test_path.is_none() || self.vectors_patch_path.is_none() =>
            {
                Err(CliError::Config(
                    "external embedder needs both --test-vecs and --patch-vecs".into(),
                ))
            }
            EmbedderKind::Builtin if has_vecs => Err(CliError::Config(
                "--test-vecs/--patch-vecs require --embedder external".into(),
            )),
            EmbedderKind::Builtin if self.dim < 2 => {
                Err(CliError::Config(format!("--dim must be at least 2, got {}", self.dim)))
            }
            _ => {
                self.thresholds()?;
                Ok(())
            }
        }
    }

    pub fn thresholds(&self) -> Result<Thresholds, CliError> {
        Ok(Thresholds::new(self.t_test, self.t_patch, self.k)?)
    }
}

/// Corpus, candidates and the vectors for both, ready for prediction.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub corpus: Corpus,
    pub candidates: Vec<Patch>,
    pub test_vecs: VectorStore,
    /// Historical patches and candidates.
    pub patch_vecs: VectorStore,
}

impl Pipeline {
    /// Embeds every test, historical patch and candidate with the built-in
    /// hashing embedder.
    pub fn builtin(corpus: Corpus, candidates: Vec<Patch>, dim: usize, seed: u64) -> Result<Self, CliError> {
        let provider = EmbeddingProvider::builtin(dim, seed)?;
        let test_vecs = corpus
            .tests()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|t| {
                provider
                    .embed_test(t, None)
                    .map(|v| (t.id.clone(), v))
                    .map_err(|e| CliError::Domain(format!("test {:?}: {e}", t.id)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut tstore = VectorStore::new(provider.name.clone(), dim);
        for (id, v) in test_vecs {
            tstore.insert(id, v);
        }

        let mut pstore = VectorStore::new(provider.name.clone(), dim);
        for p in corpus.patches() {
            pstore.insert(p.id.clone(), provider.embed_patch(p, None)?);
        }
        for c in &candidates {
            if let Some(hist) = corpus.patch(&c.id) {
                if hist.diff != c.diff {
                    return Err(CliError::Config(format!(
                        "candidate {:?} reuses a corpus patch id with a different diff",
                        c.id
                    )));
                }
                continue;
            }
            pstore.insert(c.id.clone(), provider.embed_patch(c, None)?);
        }
        Ok(Self {
            corpus,
            candidates,
            test_vecs: tstore,
            patch_vecs: pstore,
        })
    }

    pub fn external(
        corpus: Corpus,
        candidates: Vec<Patch>,
        test_vecs: VectorStore,
        patch_vecs: VectorStore,
    ) -> Result<Self, CliError> {
        if !test_vecs.is_empty() && !patch_vecs.is_empty() && test_vecs.dim() < 2 {
            return Err(CliError::Config("test vectors must have dimension ≥ 2".into()));
        }
        Ok(Self {
            corpus,
            candidates,
            test_vecs,
            patch_vecs,
        })
    }

    pub fn from_config(cfg: &RunConfig) -> Result<Self, CliError> {
        cfg.validate()?;
        let corpus = load_corpus(&cfg.corpus_path)?;
        let candidates = match &cfg.candidates_path {
            Some(p) => load_candidates(p)?,
            None => Vec::new(),
        };
        match cfg.embedder {
            EmbedderKind::Builtin => Pipeline::builtin(corpus, candidates, cfg.dim, cfg.seed),
            EmbedderKind::External => {
                let tv = load_vector_store(cfg.vectors_test_path.as_ref().expect("validated"))?;
                let pv = load_vector_store(cfg.vectors_patch_path.as_ref().expect("validated"))?;
                Pipeline::external(corpus, candidates, tv, pv)
            }
        }
    }

    /// One record per candidate, in candidate order. Per-candidate failures
    /// become `error` records.
    pub fn predict(
        &self,
        thresholds: Thresholds,
        measure: SimilarityMeasure,
        scope: Scope,
        predictor: PredictorKind,
    ) -> Vec<PredictionRecord> {
        self.candidates
            .par_iter()
            .map(|cand| {
                let source = match predictor {
                    PredictorKind::Bats => Source::Bats,
                    PredictorKind::History => Source::BaselineHistory,
                    PredictorKind::Levenshtein => Source::BaselineLevenshtein,
                };
                self.predict_one(cand, thresholds, measure, scope, predictor)
                    .unwrap_or_else(|e| PredictionRecord::failed(&cand.id, source, e.to_string()))
            })
            .collect()
    }

    fn predict_one(
        &self,
        cand: &Patch,
        thresholds: Thresholds,
        measure: SimilarityMeasure,
        scope: Scope,
        predictor: PredictorKind,
    ) -> Result<PredictionRecord, PredictError> {
        let space = make_search_space(&self.corpus, &cand.bug, scope);
        let ctx = PredictionContext {
            space: &space,
            test_vecs: &self.test_vecs,
            patch_vecs: &self.patch_vecs,
            thresholds,
            measure,
        };
        let failing = self.corpus.tests_of_bug(&cand.bug).map(|t| t.id.as_str());
        match predictor {
            PredictorKind::Bats => predict_bats(cand, failing, &ctx),
            PredictorKind::History => predict_baseline_history(cand, &ctx),
            PredictorKind::Levenshtein => {
                let neighbors = ctx.neighbors(failing)?;
                predict_baseline_levenshtein(cand, &neighbors, &self.corpus, &thresholds)
            }
        }
    }

    pub fn labels(&self) -> HashMap<String, Label> {
        self.candidates.iter().map(|c| (c.id.clone(), c.label)).collect()
    }

    pub fn bug_of(&self) -> HashMap<String, String> {
        self.candidates
            .iter()
            .map(|c| (c.id.clone(), c.bug.to_string()))
            .collect()
    }

    pub fn evaluate(&self, records: &[PredictionRecord]) -> MetricReport {
        evaluate(records, &self.labels(), &self.bug_of())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub tests: usize,
    pub patches_correct: usize,
    pub patches_incorrect: usize,
    pub patches_unlabeled: usize,
    pub links: usize,
}

pub fn cmd_validate(corpus_path: impl AsRef<std::path::Path>) -> Result<ValidationSummary, CliError> {
    let c = load_corpus(corpus_path)?;
    let tests = c.tests().len();
    Ok(ValidationSummary {
        tests,
        patches_correct: c.count_by_label(Label::Correct),
        patches_incorrect: c.count_by_label(Label::Incorrect),
        patches_unlabeled: c.count_by_label(Label::Unlabeled),
        links: c.links().len(),
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub correct: usize,
    pub incorrect: usize,
    pub abstain: usize,
    pub error: usize,
}

impl VerdictCounts {
    pub fn of(records: &[PredictionRecord]) -> Self {
        let mut c = VerdictCounts::default();
        for r in records {
            match r.verdict {
                Verdict::Correct => c.correct += 1,
                Verdict::Incorrect => c.incorrect += 1,
                Verdict::Abstain => c.abstain += 1,
                Verdict::Error => c.error += 1,
            }
        }
        c
    }
}

pub fn records_to_jsonl(records: &[PredictionRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

fn require_candidates(p: &Pipeline) -> Result<(), CliError> {
    if p.candidates.is_empty() {
        return Err(CliError::Config("no candidates: pass --candidates".into()));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct PredictRun {
    pub records: Vec<PredictionRecord>,
    pub counts: VerdictCounts,
}

pub fn cmd_predict(cfg: &RunConfig, predictor: PredictorKind) -> Result<PredictRun, CliError> {
    let pipeline = Pipeline::from_config(cfg)?;
    require_candidates(&pipeline)?;
    let records = pipeline.predict(cfg.thresholds()?, cfg.measure, cfg.scope, predictor);
    Ok(PredictRun {
        counts: VerdictCounts::of(&records),
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub t_test: f64,
    pub report: MetricReport,
}

/// Runs the predictor at every `t_test` in `sweep`.
pub fn sweep_rows(
    pipeline: &Pipeline,
    base: Thresholds,
    measure: SimilarityMeasure,
    scope: Scope,
    predictor: PredictorKind,
    sweep: &[f64],
) -> Result<Vec<SweepRow>, CliError> {
    sweep
        .iter()
        .map(|&t| {
            let th = Thresholds::new(t, base.t_patch, base.k)?;
            let records = pipeline.predict(th, measure, scope, predictor);
            Ok(SweepRow {
                t_test: t,
                report: pipeline.evaluate(&records),
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.report.csv_row(r.t_test));
        out.push('\n');
    }
    out
}

pub fn cmd_eval(cfg: &RunConfig, sweep: &[f64], predictor: PredictorKind) -> Result<Vec<SweepRow>, CliError> {
    let pipeline = Pipeline::from_config(cfg)?;
    require_candidates(&pipeline)?;
    if pipeline.labels().values().all(|l| *l == Label::Unlabeled) {
        return Err(CliError::Config("eval needs labeled candidates".into()));
    }
    let sweep = if sweep.is_empty() { &DEFAULT_SWEEP[..] } else { sweep };
    sweep_rows(&pipeline, cfg.thresholds()?, cfg.measure, cfg.scope, predictor, sweep)
}

/// Which cluster counts `cluster` reports on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KSpec(Vec<usize>);

impl KSpec {
    pub fn values(&self) -> &[usize] {
        &self.0
    }
}

impl FromStr for KSpec {
    type Err = String;

    /// `40`, `30,40,50`, or an inclusive range `2..40`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("bad k {x:?}"));
        let mut ks = if let Some((a, b)) = s.split_once("..") {
            let (a, b) = (parse(a)?, parse(b.trim_start_matches('='))?);
            if a > b {
                return Err(format!("empty range {s:?}"));
            }
            (a..=b).collect()
        } else {
            s.split(',').map(parse).collect::<Result<Vec<_>, _>>()?
        };
        if ks.contains(&0) || ks.is_empty() {
            return Err("k values must be positive".into());
        }
        ks.sort_unstable();
        ks.dedup();
        Ok(KSpec(ks))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohesionSummary {
    pub csc: f64,
    pub qualified: (usize, usize),
    pub cluster_sc: Vec<Option<f64>>,
}

impl From<&ClusterReport> for CohesionSummary {
    fn from(r: &ClusterReport) -> Self {
        Self {
            csc: r.csc,
            qualified: r.qualified,
            cluster_sc: r.cluster_sc.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KReport {
    pub k: usize,
    pub sse: f64,
    pub tests: Option<CohesionSummary>,
    pub patches: Option<CohesionSummary>,
    /// Correlation of per-cluster mean SC, tests vs. induced patch groups.
    pub pearson_r: Option<f64>,
    pub test_clusters: Vec<Vec<String>>,
    pub patch_clusters: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterLabReport {
    pub seed: u64,
    pub n_tests: usize,
    pub sse_curve: Vec<(usize, f64)>,
    pub reports: Vec<KReport>,
}

/// Clusters linked test vectors at each requested k and scores both the
/// test clusters and the patch groups they induce.
pub fn cluster_lab(
    corpus: &Corpus,
    test_vecs: &VectorStore,
    patch_vecs: &VectorStore,
    ks: &KSpec,
    seed: u64,
) -> Result<ClusterLabReport, CliError> {
    let linked: Vec<&str> = corpus.links().iter().map(|l| l.test_id.as_str()).collect();
    for id in &linked {
        if !test_vecs.contains(id) {
            return Err(EmbeddingError::MissingVector(id.to_string()).into());
        }
    }
    let tvecs = test_vecs.subset(linked.iter().copied());
    let k_max = *ks.values().last().expect("non-empty");
    let path = bisecting_path(&tvecs, k_max, seed)?;
    let k_min = ks.values()[0];

    let sse_curve = path[k_min - 1..]
        .iter()
        .map(|c| Ok((c.k(), crate::clusterlab::sse(&c.partition, &tvecs)?)))
        .collect::<Result<Vec<_>, ClusterError>>()?;

    let mut reports = Vec::new();
    for &k in ks.values() {
        let clustering = &path[k - 1];
        let tests = cluster_report(&clustering.partition, &tvecs).ok();
        let grouping = induced_patch_grouping(&clustering.partition, corpus)?;
        let patches = cluster_report(&grouping, patch_vecs).ok();
        let pearson_r = match (&tests, &patches) {
            (Some(t), Some(p)) => {
                let (xs, ys): (Vec<f64>, Vec<f64>) = t
                    .cluster_sc
                    .iter()
                    .zip(&p.cluster_sc)
                    .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
                    .unzip();
                pearson(&xs, &ys).ok()
            }
            _ => None,
        };
        reports.push(KReport {
            k,
            sse: crate::clusterlab::sse(&clustering.partition, &tvecs)?,
            tests: tests.as_ref().map(CohesionSummary::from),
            patches: patches.as_ref().map(CohesionSummary::from),
            pearson_r,
            test_clusters: clustering.partition.member_ids(),
            patch_clusters: grouping.member_ids(),
        });
    }
    Ok(ClusterLabReport {
        seed,
        n_tests: tvecs.len(),
        sse_curve,
        reports,
    })
}

pub fn cmd_cluster(cfg: &RunConfig, ks: &KSpec) -> Result<ClusterLabReport, CliError> {
    let pipeline = Pipeline::from_config(cfg)?;
    cluster_lab(&pipeline.corpus, &pipeline.test_vecs, &pipeline.patch_vecs, ks, cfg.seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectHypothesis {
    pub project: String,
    pub h: Vec<f64>,
    pub n: Vec<f64>,
    pub median_h: Option<f64>,
    pub median_n: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub scope: Scope,
    pub t_test: Option<f64>,
    pub projects: Vec<ProjectHypothesis>,
    /// Cut-off used for `below_cutoff`.
    pub cutoff: f64,
    /// Tests whose nearest historical test scores below `cutoff`.
    pub below_cutoff: usize,
    pub total_tests: usize,
    pub fraction_below: f64,
}

pub fn hypothesis_study(
    corpus: &Corpus,
    test_vecs: &VectorStore,
    patch_vecs: &VectorStore,
    scope: Scope,
    t_test: Option<f64>,
) -> Result<HypothesisReport, CliError> {
    let report = scenario_h_vs_n(corpus, test_vecs, patch_vecs, scope, t_test)?;
    let cutoff = t_test.unwrap_or(DEFAULT_DISSIMILAR_CUTOFF);
    let total = report.nearest_test_similarity.len();
    let below = report.nearest_test_similarity.iter().filter(|&&s| s < cutoff).count();
    Ok(HypothesisReport {
        scope,
        t_test,
        projects: report
            .projects
            .into_iter()
            .map(|(project, s)| ProjectHypothesis {
                median_h: median(&s.h),
                median_n: median(&s.n),
                project,
                h: s.h,
                n: s.n,
            })
            .collect(),
        cutoff,
        below_cutoff: below,
        total_tests: total,
        fraction_below: if total == 0 { 0.0 } else { below as f64 / total as f64 },
    })
}

pub fn cmd_hypothesis(cfg: &RunConfig, t_test: Option<f64>) -> Result<HypothesisReport, CliError> {
    let pipeline = Pipeline::from_config(cfg)?;
    hypothesis_study(&pipeline.corpus, &pipeline.test_vecs, &pipeline.patch_vecs, cfg.scope, t_test)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombineSummary {
    pub total: usize,
    pub by_bats: usize,
    pub by_external: usize,
    pub fraction_bats: f64,
    pub fraction_external: f64,
}

#[derive(Debug, Clone)]
pub struct CombineRun {
    pub records: Vec<PredictionRecord>,
    pub summary: CombineSummary,
}

/// Retrieval verdicts where some historical test scores above `gate`,
/// external verdicts for the rest.
pub fn combine_run(
    pipeline: &Pipeline,
    external: &indexmap::IndexMap<String, crate::predictor::ExternalPrediction>,
    gate: f64,
    t_patch: f64,
    k: usize,
    measure: SimilarityMeasure,
    scope: Scope,
) -> Result<CombineRun, CliError> {
    let th = Thresholds::new(gate, t_patch, k)?;
    let bats = pipeline.predict(th, measure, scope, PredictorKind::Bats);
    let records = combine_predictions(bats, external)?;
    let total = records.len();
    let by_external = records.iter().filter(|r| r.source == Source::External).count();
    let by_bats = total - by_external;
    let frac = |n: usize| if total == 0 { 0.0 } else { n as f64 / total as f64 };
    Ok(CombineRun {
        summary: CombineSummary {
            total,
            by_bats,
            by_external,
            fraction_bats: frac(by_bats),
            fraction_external: frac(by_external),
        },
        records,
    })
}

pub fn cmd_combine(cfg: &RunConfig, external_path: &std::path::Path, gate: f64) -> Result<CombineRun, CliError> {
    let pipeline = Pipeline::from_config(cfg)?;
    require_candidates(&pipeline)?;
    let external = load_external_predictions(external_path)?;
    combine_run(&pipeline, &external, gate, cfg.t_patch, cfg.k, cfg.measure, cfg.scope)
}
