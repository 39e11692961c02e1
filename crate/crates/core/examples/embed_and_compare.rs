//! Built-in hashing embeddings and the similarity measures on top of them.
//!
//! cargo run --example embed_and_compare

use patchtriage::corpus::{BugId, Label, Patch, TestCase};
use patchtriage::simindex::{cosine, euclidean_sim, levenshtein_sim};
use patchtriage::EmbeddingProvider;

fn test(id: &str, body: &str) -> TestCase {
    TestCase {
        id: id.into(),
        bug: BugId::new("Demo", 1).unwrap(),
        name: id.into(),
        source: body.into(),
    }
}

fn patch(id: &str, diff: &str) -> Patch {
    Patch::from_diff(id, BugId::new("Demo", 1).unwrap(), "demo", Label::Unlabeled, diff).unwrap()
}

fn main() {
    let provider = EmbeddingProvider::builtin(128, 42).unwrap();

    let tests = [
        test("null_a", "assertNull(StringUtils.trim(null));"),
        test("null_b", "assertNull(StringUtils.strip(null));"),
        test("dates", "assertEquals(2020, new LocalDate(2020, 1, 1).getYear());"),
    ];
    let tv: Vec<_> = tests.iter().map(|t| provider.embed_test(t, None).unwrap()).collect();
    println!("test similarity (euclidean_sim = 1/(1+d)):");
    for i in 0..tests.len() {
        for j in i + 1..tests.len() {
            println!(
                "  {:7} vs {:7}  {:.4}",
                tests[i].id,
                tests[j].id,
                euclidean_sim(&tv[i], &tv[j]).unwrap()
            );
        }
    }

    let guard = "@@ -1,1 +1,2 @@\n+if (str == null) return null;\n return str.trim();\n";
    let reordered = "@@ -1,1 +1,1 @@\n+int n = 0;\n@@ -9,1 +9,2 @@\n+if (str == null) return null;\n";
    let original = "@@ -9,1 +9,2 @@\n+if (str == null) return null;\n@@ -1,1 +1,1 @@\n+int n = 0;\n";
    let a = provider.embed_patch(&patch("a", reordered), None).unwrap();
    let b = provider.embed_patch(&patch("b", original), None).unwrap();
    println!("\nhunk order does not change the patch vector: {}", a == b);

    let g = provider.embed_patch(&patch("g", guard), None).unwrap();
    println!("cosine(guard, two-hunk patch)   {:.4}", cosine(&g, &a).unwrap());
    println!("levenshtein_sim(raw diffs)      {:.4}", levenshtein_sim(guard, original));
}
