//! Seeded generator for synthetic corpora in which similar failing tests
//! are fixed by similar patches.
//!
//! Bugs are grouped into families. Every family owns a private vocabulary
//! for its test bodies and another for its patch lines, so tests of one
//! family resemble each other and so do their fixes. Each bug adds a few
//! private words on top. Candidates come in two kinds:
//!
//! * correct: the bug's own fix with hunks reordered, one word swapped and
//!   the surrounding context rewritten;
//! * incorrect: statements of the usual shape built from other families'
//!   patch vocabularies, so syntax alone does not give them away.

use crate::corpus::{BugId, Corpus, Label, Link, Patch, TestCase};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;
use std::fmt::Write as _;

const PROJECTS: [&str; 4] = ["Chart", "Lang", "Math", "Time"];
const TEST_WORDS_PER_FAMILY: usize = 14;
const PATCH_WORDS_PER_FAMILY: usize = 10;
const TEMPLATE_STATEMENTS: usize = 12;

#[derive(Debug, Clone)]
pub struct SynthConfig {
    /// Bugs per family; the sum is the number of bugs.
    pub family_sizes: Vec<usize>,
    pub max_tests_per_bug: usize,
    pub correct_per_bug: usize,
    pub incorrect_per_bug: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    /// 40 bugs in ten families, two of which hold a single bug.
    fn default() -> Self {
        Self {
            family_sizes: vec![6, 6, 5, 5, 4, 4, 4, 4, 1, 1],
            max_tests_per_bug: 3,
            correct_per_bug: 2,
            incorrect_per_bug: 2,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub corpus: Corpus,
    pub candidates: Vec<Patch>,
    /// Family index of every bug, in corpus bug order.
    pub families: Vec<(BugId, usize)>,
}

struct Words {
    rng: ChaCha8Rng,
    used: HashSet<String>,
}

impl Words {
    /// A fresh lowercase pseudo-word; tokenizes to exactly itself.
    fn fresh(&mut self) -> String {
        loop {
            let len = self.rng.gen_range(5..9);
            let w: String = (0..len)
                .map(|_| char::from(b'a' + self.rng.gen_range(0..26u8)))
                .collect();
            if self.used.insert(w.clone()) {
                return w;
            }
        }
    }

    fn many(&mut self, n: usize) -> Vec<String> {
        (0..n).map(|_| self.fresh()).collect()
    }
}

struct Family {
    test_words: Vec<String>,
    patch_words: Vec<String>,
    /// Statement templates for test bodies, as word triples.
    statements: Vec<[usize; 3]>,
    /// Patch hunks, each a list of (marker, word triple).
    hunks: Vec<Vec<(char, [usize; 3])>>,
}

fn triple(rng: &mut ChaCha8Rng, n: usize) -> [usize; 3] {
    [rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)]
}

fn make_family(words: &mut Words) -> Family {
    let test_words = words.many(TEST_WORDS_PER_FAMILY);
    let patch_words = words.many(PATCH_WORDS_PER_FAMILY);
    let rng = &mut words.rng;
    let statements = (0..TEMPLATE_STATEMENTS)
        .map(|_| triple(rng, TEST_WORDS_PER_FAMILY))
        .collect();
    let hunk_count = rng.gen_range(2..4);
    let hunks = (0..hunk_count)
        .map(|_| {
            (0..rng.gen_range(2..4))
                .map(|_| {
                    let marker = if rng.gen_bool(0.7) { '+' } else { '-' };
                    (marker, triple(rng, PATCH_WORDS_PER_FAMILY))
                })
                .collect()
        })
        .collect();
    Family {
        test_words,
        patch_words,
        statements,
        hunks,
    }
}

fn camel(a: &str, b: &str) -> String {
    let mut out = a.to_string();
    let mut chars = b.chars();
    if let Some(c) = chars.next() {
        out.extend(c.to_uppercase());
        out.push_str(chars.as_str());
    }
    out
}

fn statement_line(w: &[String], t: [usize; 3]) -> String {
    format!(
        "        {}.{}({}.{}());",
        w[t[0]],
        camel("get", &w[t[1]]),
        w[t[2]],
        camel("to", &w[t[1]])
    )
}

fn patch_line(w: &[String], t: [usize; 3]) -> String {
    match (t[0] + t[1]) % 3 {
        0 => format!("if ({} != null && {}.{}()) {{", w[t[0]], w[t[1]], w[t[2]]),
        1 => format!("{} = {}.{}({});", w[t[0]], w[t[1]], camel("with", &w[t[2]]), w[t[0]]),
        _ => format!("return {}.{}({}) >= 0;", w[t[0]], w[t[1]], w[t[2]]),
    }
}

/// One hunk body: `(marker, text)` lines.
type HunkLines = Vec<(char, String)>;

fn render_diff(file: &str, hunks: &[HunkLines], context: &[String], indent: &str) -> String {
    let mut out = format!("--- a/src/{file}.java\n+++ b/src/{file}.java\n");
    let mut line = 10;
    for (i, h) in hunks.iter().enumerate() {
        let removed = h.iter().filter(|(m, _)| *m == '-').count();
        let added = h.len() - removed;
        let _ = writeln!(out, "@@ -{line},{} +{line},{} @@", removed + 2, added + 2);
        let before = &context[(2 * i) % context.len()];
        let after = &context[(2 * i + 1) % context.len()];
        let _ = writeln!(out, " {indent}{before}");
        for (m, text) in h {
            let _ = writeln!(out, "{m}{indent}{text}");
        }
        let _ = writeln!(out, " {indent}{after}");
        line += 20;
    }
    out
}

fn context_lines(words: &mut Words, n: usize) -> Vec<String> {
    (0..n)
        .map(|_| {
            let (a, b, c) = (words.fresh(), words.fresh(), words.fresh());
            format!("{a}.{}({c});", camel("set", &b))
        })
        .collect()
}

/// Generates a corpus (tests, developer patches, links) plus labeled
/// candidates for every bug.
pub fn generate(cfg: &SynthConfig) -> SynthData {
    let mut words = Words {
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        used: HashSet::new(),
    };
    let families: Vec<Family> = cfg.family_sizes.iter().map(|_| make_family(&mut words)).collect();

    let mut tests = Vec::new();
    let mut patches = Vec::new();
    let mut links = Vec::new();
    let mut candidates = Vec::new();
    let mut bug_families = Vec::new();
    let mut per_project = [0u32; PROJECTS.len()];

    let mut bug_index = 0usize;
    for (fi, &size) in cfg.family_sizes.iter().enumerate() {
        for _ in 0..size {
            let pi = bug_index % PROJECTS.len();
            per_project[pi] += 1;
            let bug = BugId::new(PROJECTS[pi], per_project[pi]).expect("valid synthetic bug id");
            bug_index += 1;
            bug_families.push((bug.clone(), fi));
            let fam = &families[fi];

            // Tests: family statements, two bug-private statements, and one
            // test-private call.
            let bug_words = words.many(3);
            let n_tests = words.rng.gen_range(1..=cfg.max_tests_per_bug);
            let dev_id = format!("{bug}-dev");
            for ti in 0..n_tests {
                let own = words.fresh();
                let mut body = String::new();
                for s in &fam.statements {
                    let _ = writeln!(body, "{}", statement_line(&fam.test_words, *s));
                }
                let _ = writeln!(body, "        {}.{}();", bug_words[0], camel("check", &bug_words[1]));
                let _ = writeln!(body, "        assertEquals({}, {});", bug_words[2], own);
                let name = camel("test", &own);
                let id = format!("{bug}::{name}#{ti}");
                tests.push(TestCase {
                    id: id.clone(),
                    bug: bug.clone(),
                    name: name.clone(),
                    source: format!("    @Test\n    public void {name}() {{\n{body}    }}\n"),
                });
                links.push(Link {
                    test_id: id,
                    patch_id: dev_id.clone(),
                });
            }

            // Developer fix: family hunks plus one bug-private line.
            let file = camel("source", &words.fresh());
            let context = context_lines(&mut words, 6);
            let mut dev_hunks: Vec<HunkLines> = fam
                .hunks
                .iter()
                .map(|h| {
                    h.iter()
                        .map(|(m, t)| (*m, patch_line(&fam.patch_words, *t)))
                        .collect()
                })
                .collect();
            let private = words.fresh();
            dev_hunks[0].push(('+', format!("{private}.{}();", camel("reset", &bug_words[0]))));
            let dev_diff = render_diff(&file, &dev_hunks, &context, "        ");
            patches.push(
                Patch::from_diff(&dev_id, bug.clone(), "developer", Label::Correct, dev_diff)
                    .expect("synthetic diff has changes"),
            );

            for ci in 0..cfg.correct_per_bug {
                let mut hunks = dev_hunks.clone();
                let n = hunks.len();
                hunks.rotate_left(1 + ci % n);
                // swap one word for a fresh one
                let h = words.rng.gen_range(0..hunks.len());
                let l = words.rng.gen_range(0..hunks[h].len());
                let fresh = words.fresh();
                let text = &mut hunks[h][l].1;
                if let Some(pos) = text.find(|c: char| !c.is_alphanumeric()) {
                    text.replace_range(..pos, &fresh);
                }
                let ctx = context_lines(&mut words, 6);
                let diff = render_diff(&file, &hunks, &ctx, "    ");
                candidates.push(
                    Patch::from_diff(format!("{bug}-ok{ci}"), bug.clone(), "synthetic-repair", Label::Correct, diff)
                        .expect("synthetic diff has changes"),
                );
            }

            for ii in 0..cfg.incorrect_per_bug {
                let others: Vec<usize> = (0..families.len()).filter(|&f| f != fi).collect();
                let n_hunks = dev_hunks.len();
                let hunks: Vec<HunkLines> = (0..n_hunks)
                    .map(|_| {
                        let n_lines = words.rng.gen_range(2..5);
                        (0..n_lines)
                            .map(|_| {
                                let vocab = match others.choose(&mut words.rng) {
                                    Some(&f) => families[f].patch_words.clone(),
                                    // a lone family has no neighbors to borrow from
                                    None => words.many(PATCH_WORDS_PER_FAMILY),
                                };
                                let t = triple(&mut words.rng, PATCH_WORDS_PER_FAMILY);
                                let m = if words.rng.gen_bool(0.5) { '+' } else { '-' };
                                (m, patch_line(&vocab, t))
                            })
                            .collect()
                    })
                    .collect();
                let diff = render_diff(&file, &hunks, &context, "        ");
                candidates.push(
                    Patch::from_diff(format!("{bug}-bad{ii}"), bug.clone(), "synthetic-repair", Label::Incorrect, diff)
                        .expect("synthetic diff has changes"),
                );
            }
        }
    }

    SynthData {
        corpus: Corpus::new(tests, patches, links).expect("synthetic corpus is valid"),
        candidates,
        families: bug_families,
    }
}
