use clap::{Args, Parser, Subcommand};
use patchtriage::cli::{
    cmd_cluster, cmd_combine, cmd_eval, cmd_hypothesis, cmd_predict, cmd_validate, records_to_jsonl,
    sweep_csv, CliError, EmbedderKind, KSpec, PredictorKind, RunConfig,
};
use patchtriage::embedding::{DEFAULT_DIM, DEFAULT_SEED};
use patchtriage::predictor::DEFAULT_T_PATCH;
use patchtriage::simindex::{DEFAULT_K, DEFAULT_T_TEST};
use patchtriage::{Scope, SimilarityMeasure};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "patchtriage", version, about = "Test-guided patch correctness triage")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate a corpus, printing record counts.
    Validate {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Predict a verdict for every candidate patch.
    Predict {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = DEFAULT_T_TEST)]
        t_test: f64,
        #[arg(long, default_value = "bats")]
        predictor: PredictorKind,
    },
    /// Sweep t_test and write a metrics CSV.
    Eval {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated t_test values.
        #[arg(long, value_delimiter = ',')]
        sweep: Vec<f64>,
        #[arg(long, default_value = "bats")]
        predictor: PredictorKind,
    },
    /// Bisecting K-means over linked test vectors.
    Cluster {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Compare fixes of similar tests against unrelated fixes.
    Hypothesis {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        t_test: Option<f64>,
    },
    /// Fill abstentions with verdicts from an external predictor.
    Combine {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        external: PathBuf,
        #[arg(long, default_value_t = DEFAULT_T_TEST)]
        gate: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    candidates: Option<PathBuf>,
    #[arg(long)]
    test_vecs: Option<PathBuf>,
    #[arg(long)]
    patch_vecs: Option<PathBuf>,
    #[arg(long, default_value = "builtin")]
    embedder: EmbedderKind,
    #[arg(long, default_value_t = DEFAULT_DIM)]
    dim: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Patch similarity: cosine or euclidean_sim.
    #[arg(long, default_value = "cosine")]
    measure: SimilarityMeasure,
    /// Neighbor count for predict/eval/combine; for cluster a k, a list
    /// (30,40,50) or a range (2..50).
    #[arg(long)]
    k: Option<String>,
    #[arg(long, default_value_t = DEFAULT_T_PATCH)]
    t_patch: f64,
    #[arg(long, default_value = "all_projects")]
    scope: Scope,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn neighbor_k(&self) -> Result<usize, CliError> {
        match &self.k {
            Some(s) => s
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("--k must be a positive integer, got {s:?}"))),
            None => Ok(DEFAULT_K),
        }
    }

    fn config(&self, t_test: f64, k: usize) -> RunConfig {
        RunConfig {
            corpus_path: self.corpus.clone(),
            candidates_path: self.candidates.clone(),
            vectors_test_path: self.test_vecs.clone(),
            vectors_patch_path: self.patch_vecs.clone(),
            embedder: self.embedder,
            dim: self.dim,
            seed: self.seed,
            measure: self.measure,
            k,
            t_test,
            t_patch: self.t_patch,
            scope: self.scope,
            output_path: self.out.clone(),
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { corpus } => {
            let s = cmd_validate(&corpus)?;
            println!(
                "tests={} patches_correct={} patches_incorrect={} patches_unlabeled={} links={}",
                s.tests, s.patches_correct, s.patches_incorrect, s.patches_unlabeled, s.links
            );
        }
        Command::Predict { run, t_test, predictor } => {
            let cfg = run.config(t_test, run.neighbor_k()?);
            let r = cmd_predict(&cfg, predictor)?;
            emit(&cfg.output_path, &records_to_jsonl(&r.records))?;
            eprintln!(
                "correct={} incorrect={} abstain={} error={}",
                r.counts.correct, r.counts.incorrect, r.counts.abstain, r.counts.error
            );
        }
        Command::Eval { run, sweep, predictor } => {
            let cfg = run.config(DEFAULT_T_TEST, run.neighbor_k()?);
            let rows = cmd_eval(&cfg, &sweep, predictor)?;
            emit(&cfg.output_path, &sweep_csv(&rows))?;
        }
        Command::Cluster { run } => {
            let ks: KSpec = run
                .k
                .as_deref()
                .unwrap_or("40")
                .parse()
                .map_err(CliError::Config)?;
            let cfg = run.config(DEFAULT_T_TEST, DEFAULT_K);
            let report = cmd_cluster(&cfg, &ks)?;
            emit(&cfg.output_path, &json(&report))?;
        }
        Command::Hypothesis { run, t_test } => {
            let cfg = run.config(t_test.unwrap_or(DEFAULT_T_TEST), run.neighbor_k()?);
            let report = cmd_hypothesis(&cfg, t_test)?;
            emit(&cfg.output_path, &json(&report))?;
        }
        Command::Combine { run, external, gate } => {
            let cfg = run.config(gate, run.neighbor_k()?);
            let r = cmd_combine(&cfg, &external, gate)?;
            emit(&cfg.output_path, &records_to_jsonl(&r.records))?;
            eprintln!(
                "total={} bats={} ({:.4}) external={} ({:.4})",
                r.summary.total,
                r.summary.by_bats,
                r.summary.fraction_bats,
                r.summary.by_external,
                r.summary.fraction_external
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
