//! Bugs, failing tests, patches, and the historical links between them.
//!
//! A corpus is read from JSONL where every line is a `test`, `patch` or
//! `link` record. Links associate a historical failing test with the
//! known-correct patch that fixed it; many tests may share one patch.

use crate::textprep::{parse_diff, Hunk, TextError};
use indexmap::{IndexMap, IndexSet};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("validation failed: {0}")]
    Validation(String),
}

impl CorpusError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        CorpusError::Parse {
            line,
            message: message.into(),
        }
    }
}

/// `<project>-<number>`, e.g. `Chart-26`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BugId {
    project: String,
    number: u32,
}

impl BugId {
    pub fn new(project: impl Into<String>, number: u32) -> Result<Self, CorpusError> {
        let project = project.into();
        if project.is_empty() {
            return Err(CorpusError::Validation("empty project name".into()));
        }
        if number == 0 {
            return Err(CorpusError::Validation(format!(
                "bug number must be positive for project {project}"
            )));
        }
        Ok(Self { project, number })
    }

    pub fn project(&self) -> &str {
        &self.project
    }

    pub fn number(&self) -> u32 {
        self.number
    }
}

impl fmt::Display for BugId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.project, self.number)
    }
}

impl FromStr for BugId {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (project, number) = s
            .rsplit_once('-')
            .ok_or_else(|| CorpusError::Validation(format!("bug id {s:?} lacks '-<number>'")))?;
        let number = number
            .parse()
            .map_err(|_| CorpusError::Validation(format!("bug id {s:?} has a bad number")))?;
        BugId::new(project, number)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestCase {
    pub id: String,
    pub bug: BugId,
    pub name: String,
    pub source: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Correct,
    Incorrect,
    #[default]
    Unlabeled,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Patch {
    pub id: String,
    pub bug: BugId,
    pub origin: String,
    pub label: Label,
    /// Original unified-diff text; kept for raw-string comparison.
    pub diff: String,
    pub hunks: Vec<Hunk>,
}

impl Patch {
    /// Builds a patch from diff text, extracting its hunks.
    pub fn from_diff(
        id: impl Into<String>,
        bug: BugId,
        origin: impl Into<String>,
        label: Label,
        diff: impl Into<String>,
    ) -> Result<Self, TextError> {
        let diff = diff.into();
        let hunks = parse_diff(&diff)?;
        Ok(Self {
            id: id.into(),
            bug,
            origin: origin.into(),
            label,
            diff,
            hunks,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub test_id: String,
    pub patch_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    #[default]
    AllProjects,
    OtherProjectsOnly,
}

impl FromStr for Scope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all_projects" | "all" => Ok(Scope::AllProjects),
            "other_projects_only" | "other" => Ok(Scope::OtherProjectsOnly),
            other => Err(format!("unknown scope {other:?}")),
        }
    }
}

/// A validated corpus. Immutable once built; iteration follows file order.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    tests: IndexMap<String, TestCase>,
    patches: IndexMap<String, Patch>,
    links: Vec<Link>,
    /// test id → index into `patches`
    link_of: IndexMap<String, usize>,
}

/// Wire record, one per JSONL line.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Record {
    Test {
        id: String,
        project: String,
        bug: u32,
        name: String,
        source: String,
    },
    Patch {
        id: String,
        project: String,
        bug: u32,
        origin: String,
        #[serde(default)]
        label: Label,
        diff: String,
    },
    Link {
        test_id: String,
        patch_id: String,
    },
}

fn parse_record(line_no: usize, line: &str) -> Result<Record, CorpusError> {
    let value: serde_json::Value =
        serde_json::from_str(line).map_err(|e| CorpusError::parse(line_no, e.to_string()))?;
    match value.get("kind").and_then(|k| k.as_str()) {
        Some("test" | "patch" | "link") => {}
        Some(other) => return Err(CorpusError::parse(line_no, format!("unknown kind {other:?}"))),
        None => return Err(CorpusError::parse(line_no, "missing string field `kind`")),
    }
    serde_json::from_value(value).map_err(|e| CorpusError::parse(line_no, e.to_string()))
}

fn patch_from_record(
    line_no: usize,
    id: String,
    project: String,
    bug: u32,
    origin: String,
    label: Label,
    diff: String,
) -> Result<Patch, CorpusError> {
    let bug = BugId::new(project, bug).map_err(|e| CorpusError::parse(line_no, e.to_string()))?;
    Patch::from_diff(id.clone(), bug, origin, label, diff)
        .map_err(|e| CorpusError::Validation(format!("patch {id:?} (line {line_no}): {e}")))
}

fn non_blank_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn read_to_string(path: &Path) -> Result<String, CorpusError> {
    std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads and validates a corpus file.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    Corpus::from_jsonl(&read_to_string(path.as_ref())?)
}

/// Loads a candidates file: `patch` records only, label optional.
pub fn load_candidates(path: impl AsRef<Path>) -> Result<Vec<Patch>, CorpusError> {
    parse_candidates(&read_to_string(path.as_ref())?)
}

pub fn parse_candidates(text: &str) -> Result<Vec<Patch>, CorpusError> {
    let mut seen = IndexSet::new();
    let mut out = Vec::new();
    for (line_no, line) in non_blank_lines(text) {
        match parse_record(line_no, line)? {
            Record::Patch {
                id,
                project,
                bug,
                origin,
                label,
                diff,
            } => {
                if !seen.insert(id.clone()) {
                    return Err(CorpusError::Validation(format!("duplicate patch id {id:?}")));
                }
                out.push(patch_from_record(line_no, id, project, bug, origin, label, diff)?);
            }
            _ => {
                return Err(CorpusError::parse(
                    line_no,
                    "candidates file may only contain patch records",
                ))
            }
        }
    }
    Ok(out)
}

impl Corpus {
    /// Parses JSONL text, then checks every cross-record invariant.
    pub fn from_jsonl(text: &str) -> Result<Self, CorpusError> {
        let mut tests = Vec::new();
        let mut patches = Vec::new();
        let mut links = Vec::new();
        for (line_no, line) in non_blank_lines(text) {
            match parse_record(line_no, line)? {
                Record::Test {
                    id,
                    project,
                    bug,
                    name,
                    source,
                } => {
                    let bug = BugId::new(project, bug)
                        .map_err(|e| CorpusError::parse(line_no, e.to_string()))?;
                    tests.push(TestCase {
                        id,
                        bug,
                        name,
                        source,
                    });
                }
                Record::Patch {
                    id,
                    project,
                    bug,
                    origin,
                    label,
                    diff,
                } => patches.push(patch_from_record(
                    line_no, id, project, bug, origin, label, diff,
                )?),
                Record::Link { test_id, patch_id } => links.push(Link { test_id, patch_id }),
            }
        }
        Corpus::new(tests, patches, links)
    }

    pub fn new(
        tests: Vec<TestCase>,
        patches: Vec<Patch>,
        links: Vec<Link>,
    ) -> Result<Self, CorpusError> {
        let mut test_map = IndexMap::with_capacity(tests.len());
        for t in tests {
            if t.source.trim().is_empty() {
                return Err(CorpusError::Validation(format!(
                    "test {:?} has empty source",
                    t.id
                )));
            }
            if test_map.contains_key(&t.id) {
                return Err(CorpusError::Validation(format!("duplicate test id {:?}", t.id)));
            }
            test_map.insert(t.id.clone(), t);
        }
        let mut patch_map = IndexMap::with_capacity(patches.len());
        for p in patches {
            if p.hunks.is_empty() {
                return Err(CorpusError::Validation(format!("patch {:?} has no hunks", p.id)));
            }
            if patch_map.contains_key(&p.id) {
                return Err(CorpusError::Validation(format!("duplicate patch id {:?}", p.id)));
            }
            patch_map.insert(p.id.clone(), p);
        }
        let mut link_of = IndexMap::with_capacity(links.len());
        for link in &links {
            if !test_map.contains_key(&link.test_id) {
                return Err(CorpusError::Validation(format!(
                    "link references missing test id {:?}",
                    link.test_id
                )));
            }
            let Some(patch_idx) = patch_map.get_index_of(&link.patch_id) else {
                return Err(CorpusError::Validation(format!(
                    "link references missing patch id {:?}",
                    link.patch_id
                )));
            };
            if patch_map[patch_idx].label != Label::Correct {
                return Err(CorpusError::Validation(format!(
                    "linked patch {:?} is not labeled correct",
                    link.patch_id
                )));
            }
            if link_of.insert(link.test_id.clone(), patch_idx).is_some() {
                return Err(CorpusError::Validation(format!(
                    "test {:?} is linked more than once",
                    link.test_id
                )));
            }
        }
        Ok(Self {
            tests: test_map,
            patches: patch_map,
            links,
            link_of,
        })
    }

    pub fn tests(&self) -> impl ExactSizeIterator<Item = &TestCase> {
        self.tests.values()
    }

    pub fn patches(&self) -> impl ExactSizeIterator<Item = &Patch> {
        self.patches.values()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn test(&self, id: &str) -> Option<&TestCase> {
        self.tests.get(id)
    }

    pub fn patch(&self, id: &str) -> Option<&Patch> {
        self.patches.get(id)
    }

    /// The correct patch linked to a test, if any.
    pub fn linked_patch(&self, test_id: &str) -> Option<&Patch> {
        self.link_of.get(test_id).map(|&i| &self.patches[i])
    }

    /// Failing tests recorded for one bug, in file order.
    pub fn tests_of_bug<'a>(&'a self, bug: &'a BugId) -> impl Iterator<Item = &'a TestCase> + 'a {
        self.tests.values().filter(move |t| &t.bug == bug)
    }

    pub fn count_by_label(&self, label: Label) -> usize {
        self.patches.values().filter(|p| p.label == label).count()
    }

    /// Canonical JSONL: tests, then patches, then links, each in load order.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut emit = |r: &Record| {
            out.push_str(&serde_json::to_string(r).expect("records always serialize"));
            out.push('\n');
        };
        for t in self.tests.values() {
            emit(&Record::Test {
                id: t.id.clone(),
                project: t.bug.project.clone(),
                bug: t.bug.number,
                name: t.name.clone(),
                source: t.source.clone(),
            });
        }
        for p in self.patches.values() {
            emit(&patch_record(p));
        }
        for l in &self.links {
            emit(&Record::Link {
                test_id: l.test_id.clone(),
                patch_id: l.patch_id.clone(),
            });
        }
        out
    }
}

fn patch_record(p: &Patch) -> Record {
    Record::Patch {
        id: p.id.clone(),
        project: p.bug.project.clone(),
        bug: p.bug.number,
        origin: p.origin.clone(),
        label: p.label,
        diff: p.diff.clone(),
    }
}

/// Serializes patches in the candidates (patch-record) schema.
pub fn candidates_to_jsonl(patches: &[Patch]) -> String {
    let mut out = String::new();
    for p in patches {
        out.push_str(&serde_json::to_string(&patch_record(p)).expect("records always serialize"));
        out.push('\n');
    }
    out
}

/// One historical association available for retrieval.
#[derive(Debug, Clone, Copy)]
pub struct SpaceEntry<'a> {
    pub test: &'a TestCase,
    pub patch: &'a Patch,
}

/// Historical (test, correct patch) pairs with the bug under resolution
/// (and optionally its whole project) left out.
#[derive(Debug, Clone)]
pub struct SearchSpace<'a> {
    entries: Vec<SpaceEntry<'a>>,
    excluded_bug: Option<BugId>,
    scope: Scope,
}

impl<'a> SearchSpace<'a> {
    pub fn entries(&self) -> &[SpaceEntry<'a>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn excluded_bug(&self) -> Option<&BugId> {
        self.excluded_bug.as_ref()
    }

    pub fn scope(&self) -> Scope {
        self.scope
    }

    /// Distinct patches reachable from the entries, first-seen order.
    pub fn distinct_patches(&self) -> Vec<&'a Patch> {
        let mut seen = IndexSet::new();
        self.entries
            .iter()
            .filter(|e| seen.insert(e.patch.id.as_str()))
            .map(|e| e.patch)
            .collect()
    }
}

/// Builds the leave-one-out search space for `exclude`.
pub fn make_search_space<'a>(corpus: &'a Corpus, exclude: &BugId, scope: Scope) -> SearchSpace<'a> {
    let entries = corpus
        .links
        .iter()
        .filter_map(|l| {
            let test = &corpus.tests[&l.test_id];
            let patch = &corpus.patches[&l.patch_id];
            let keep = match scope {
                Scope::AllProjects => &test.bug != exclude && &patch.bug != exclude,
                Scope::OtherProjectsOnly => {
                    test.bug.project != exclude.project && patch.bug.project != exclude.project
                }
            };
            keep.then_some(SpaceEntry { test, patch })
        })
        .collect();
    SearchSpace {
        entries,
        excluded_bug: Some(exclude.clone()),
        scope,
    }
}

/// The full search space, nothing excluded.
pub fn full_search_space(corpus: &Corpus) -> SearchSpace<'_> {
    SearchSpace {
        entries: corpus
            .links
            .iter()
            .map(|l| SpaceEntry {
                test: &corpus.tests[&l.test_id],
                patch: &corpus.patches[&l.patch_id],
            })
            .collect(),
        excluded_bug: None,
        scope: Scope::AllProjects,
    }
}
