//! Writes a seeded synthetic corpus and candidate file for use with the
//! `patchtriage` binary.
//!
//! cargo run --example synth_corpus -- [out_dir] [seed]

use patchtriage::corpus::candidates_to_jsonl;
use patchtriage::synth::{generate, SynthConfig};
use std::path::PathBuf;

fn main() -> std::io::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "synth".into()));
    let seed = args.next().map_or(SynthConfig::default().seed, |s| s.parse().expect("numeric seed"));
    let data = generate(&SynthConfig {
        seed,
        ..SynthConfig::default()
    });
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("corpus.jsonl"), data.corpus.to_jsonl())?;
    std::fs::write(dir.join("candidates.jsonl"), candidates_to_jsonl(&data.candidates))?;
    println!(
        "wrote {} tests, {} patches, {} candidates to {}",
        data.corpus.tests().len(),
        data.corpus.patches().len(),
        data.candidates.len(),
        dir.display()
    );
    Ok(())
}
