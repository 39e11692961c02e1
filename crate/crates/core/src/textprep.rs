//! Lexical pre-processing of test methods and unified diffs.
//!
//! Test sources become flat sub-token sequences (camelCase and
//! letter/digit boundaries split, lowercased, comparison and logical
//! operators kept whole). Diffs are reduced to their changed lines only,
//! grouped into hunks of consecutive `+`/`-` lines.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextError {
    #[error("input produced no tokens")]
    EmptyTokens,
    #[error("diff contains no added or removed lines")]
    NoChangedLines,
}

/// Operators that survive tokenization as single tokens.
const OPERATORS: [&str; 6] = ["==", "!=", "<=", ">=", "&&", "||"];

/// An ordered sequence of non-empty, whitespace-free tokens.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenSeq(Vec<String>);

impl TokenSeq {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    fn extend(&mut self, other: TokenSeq) {
        self.0.extend(other.0);
    }
}

impl From<Vec<String>> for TokenSeq {
    fn from(tokens: Vec<String>) -> Self {
        TokenSeq(tokens)
    }
}

impl fmt::Display for TokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Marker {
    #[serde(rename = "+")]
    Added,
    #[serde(rename = "-")]
    Removed,
}

impl Marker {
    pub fn as_char(self) -> char {
        match self {
            Marker::Added => '+',
            Marker::Removed => '-',
        }
    }

    fn from_char(c: char) -> Option<Self> {
        match c {
            '+' => Some(Marker::Added),
            '-' => Some(Marker::Removed),
            _ => None,
        }
    }
}

/// One changed line of a diff; `text` excludes the marker.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MarkedLine {
    pub marker: Marker,
    pub text: String,
}

impl MarkedLine {
    pub fn new(marker: Marker, text: impl Into<String>) -> Self {
        Self {
            marker,
            text: text.into(),
        }
    }
}

/// A contiguous run of changed lines. Never empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hunk {
    lines: Vec<MarkedLine>,
}

impl Hunk {
    /// Returns `None` for an empty line list.
    pub fn new(lines: Vec<MarkedLine>) -> Option<Self> {
        (!lines.is_empty()).then_some(Self { lines })
    }

    pub fn lines(&self) -> &[MarkedLine] {
        &self.lines
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum CharClass {
    Upper,
    Lower,
    Digit,
}

fn classify(c: char) -> CharClass {
    if c.is_uppercase() {
        CharClass::Upper
    } else if c.is_alphabetic() {
        CharClass::Lower
    } else {
        CharClass::Digit
    }
}

/// Splits one alphanumeric run into lowercased sub-tokens.
///
/// Boundaries: lower→upper (`getMax` → get|Max), letter↔digit
/// (`y2` → y|2), and the last capital of an uppercase run when a
/// lowercase letter follows (`XMLParser` → XML|Parser).
fn split_identifier(word: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = word.chars().collect();
    let mut start = 0;
    for i in 1..chars.len() {
        let prev = classify(chars[i - 1]);
        let cur = classify(chars[i]);
        let boundary = match (prev, cur) {
            (CharClass::Lower, CharClass::Upper) => true,
            (CharClass::Digit, CharClass::Upper | CharClass::Lower) => true,
            (CharClass::Upper | CharClass::Lower, CharClass::Digit) => true,
            (CharClass::Upper, CharClass::Upper) => chars
                .get(i + 1)
                .is_some_and(|&next| classify(next) == CharClass::Lower),
            _ => false,
        };
        if boundary {
            push_lowered(&chars[start..i], out);
            start = i;
        }
    }
    push_lowered(&chars[start..], out);
}

fn push_lowered(chars: &[char], out: &mut Vec<String>) {
    // Some lowercase mappings emit combining marks; keep alphanumerics only
    // so re-tokenizing the output is stable.
    let token: String = chars
        .iter()
        .flat_map(|c| c.to_lowercase())
        .filter(|c| c.is_alphanumeric())
        .collect();
    if !token.is_empty() {
        out.push(token);
    }
}

fn tokenize_into(source: &str, out: &mut Vec<String>) {
    let mut rest = source;
    while let Some(c) = rest.chars().next() {
        if c.is_alphanumeric() {
            let end = rest
                .char_indices()
                .find(|&(_, ch)| !ch.is_alphanumeric())
                .map_or(rest.len(), |(i, _)| i);
            split_identifier(&rest[..end], out);
            rest = &rest[end..];
        } else if let Some(op) = OPERATORS.iter().find(|op| rest.starts_with(**op)) {
            out.push((*op).to_string());
            rest = &rest[op.len()..];
        } else {
            rest = &rest[c.len_utf8()..];
        }
    }
}

/// Tokenizes test-method source text into lowercased sub-tokens.
pub fn tokenize_test(source: &str) -> Result<TokenSeq, TextError> {
    let mut tokens = Vec::new();
    tokenize_into(source, &mut tokens);
    if tokens.is_empty() {
        return Err(TextError::EmptyTokens);
    }
    Ok(TokenSeq(tokens))
}

/// Tokenizes a hunk: each line contributes its marker as a standalone
/// token followed by the tokens of its text.
pub fn tokenize_hunk(hunk: &Hunk) -> TokenSeq {
    let mut seq = TokenSeq::default();
    for line in &hunk.lines {
        seq.0.push(line.marker.as_char().to_string());
        let mut rest = Vec::new();
        tokenize_into(&line.text, &mut rest);
        seq.extend(TokenSeq(rest));
    }
    seq
}

/// Line counts still expected inside an `@@ -a,b +c,d @@` section.
#[derive(Clone, Copy)]
struct Remaining {
    old: usize,
    new: usize,
}

fn parse_range_len(spec: &str) -> Option<usize> {
    // "-12,3" / "+7" → 3 / 1
    let body = &spec[1..];
    match body.split_once(',') {
        Some((start, len)) => {
            start.parse::<usize>().ok()?;
            len.parse().ok()
        }
        None => body.parse::<usize>().ok().map(|_| 1),
    }
}

fn parse_hunk_header(line: &str) -> Option<Remaining> {
    let inner = line.strip_prefix("@@ ")?;
    let (ranges, _) = inner.split_once(" @@")?;
    let mut parts = ranges.split_whitespace();
    let old = parts.next().filter(|p| p.starts_with('-'))?;
    let new = parts.next().filter(|p| p.starts_with('+'))?;
    Some(Remaining {
        old: parse_range_len(old)?,
        new: parse_range_len(new)?,
    })
}

enum Section {
    /// Outside any hunk body: headers and preamble.
    Outside,
    /// Inside a hunk with known line counts.
    Counted(Remaining),
    /// Inside a hunk whose header did not carry counts (or no header at all).
    Loose,
}

struct Segmenter {
    hunks: Vec<Hunk>,
    run: Vec<MarkedLine>,
}

impl Segmenter {
    fn push(&mut self, marker: Marker, text: &str) {
        if !text.trim().is_empty() {
            self.run.push(MarkedLine::new(marker, text));
        }
    }

    fn close(&mut self) {
        if let Some(h) = Hunk::new(std::mem::take(&mut self.run)) {
            self.hunks.push(h);
        }
    }
}

/// Extracts hunks of changed lines from unified-diff text.
///
/// File headers, index lines, `@@` headers and context lines are dropped.
/// A context line (or a new `@@` section) ends the current hunk. When the
/// text has no `@@` header at all, it is read as a bare run of lines.
pub fn parse_diff(diff_text: &str) -> Result<Vec<Hunk>, TextError> {
    let has_headers = diff_text.lines().any(|l| l.starts_with("@@"));
    let mut section = if has_headers {
        Section::Outside
    } else {
        Section::Loose
    };
    let mut seg = Segmenter {
        hunks: Vec::new(),
        run: Vec::new(),
    };

    for line in diff_text.lines() {
        if line.starts_with("@@") {
            seg.close();
            section = match parse_hunk_header(line) {
                Some(r) if r.old + r.new > 0 => Section::Counted(r),
                Some(_) => Section::Outside,
                None => Section::Loose,
            };
            continue;
        }
        if line.starts_with('\\') {
            // "\ No newline at end of file"
            continue;
        }
        let first = line.chars().next();
        match &mut section {
            Section::Outside => {}
            Section::Counted(rem) => {
                match first.and_then(Marker::from_char) {
                    Some(Marker::Removed) if rem.old > 0 => {
                        rem.old -= 1;
                        seg.push(Marker::Removed, &line[1..]);
                    }
                    Some(Marker::Added) if rem.new > 0 => {
                        rem.new -= 1;
                        seg.push(Marker::Added, &line[1..]);
                    }
                    _ => {
                        seg.close();
                        rem.old = rem.old.saturating_sub(1);
                        rem.new = rem.new.saturating_sub(1);
                    }
                }
                if rem.old == 0 && rem.new == 0 {
                    seg.close();
                    section = Section::Outside;
                }
            }
            Section::Loose => {
                if line.starts_with("+++") || line.starts_with("---") {
                    seg.close();
                    continue;
                }
                match first.and_then(Marker::from_char) {
                    Some(marker) => seg.push(marker, &line[1..]),
                    None => {
                        if !is_header_noise(line) {
                            seg.close();
                        }
                    }
                }
            }
        }
    }
    seg.close();

    if seg.hunks.is_empty() {
        return Err(TextError::NoChangedLines);
    }
    Ok(seg.hunks)
}

fn is_header_noise(line: &str) -> bool {
    line.starts_with("diff ") || line.starts_with("index ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        tokenize_test(s).unwrap().into_inner()
    }

    #[test]
    fn camel_case_call() {
        assert_eq!(toks("assertNull(series)"), ["assert", "null", "series"]);
    }

    #[test]
    fn letter_digit_boundaries() {
        assert_eq!(toks("getMaxY2"), ["get", "max", "y", "2"]);
        assert_eq!(toks("chart26Test"), ["chart", "26", "test"]);
    }

    #[test]
    fn acronym_runs() {
        assert_eq!(toks("XMLParser"), ["xml", "parser"]);
        assert_eq!(toks("parseHTTPResponse"), ["parse", "http", "response"]);
        assert_eq!(toks("ALL_CAPS"), ["all", "caps"]);
    }

    #[test]
    fn operators_survive() {
        assert_eq!(toks("x == null"), ["x", "==", "null"]);
        assert_eq!(toks("a&&b||!c"), ["a", "&&", "b", "||", "c"]);
        assert_eq!(toks("i<=n; j>=0; k!=1"), ["i", "<=", "n", "j", ">=", "0", "k", "!=", "1"]);
    }

    #[test]
    fn string_literals_tokenized_like_code() {
        assert_eq!(toks(r#"fail("noValue")"#), ["fail", "no", "value"]);
    }

    #[test]
    fn punctuation_only_is_empty() {
        assert_eq!(tokenize_test("(){};"), Err(TextError::EmptyTokens));
        assert_eq!(tokenize_test(""), Err(TextError::EmptyTokens));
    }

    #[test]
    fn hunk_tokens_lead_with_marker() {
        let h = Hunk::new(vec![MarkedLine::new(Marker::Removed, "return dataset;")]).unwrap();
        assert_eq!(tokenize_hunk(&h).into_inner(), ["-", "return", "dataset"]);
        let h = Hunk::new(vec![MarkedLine::new(Marker::Added, "if (r != null) {")]).unwrap();
        assert_eq!(tokenize_hunk(&h).into_inner(), ["+", "if", "r", "!=", "null"]);
    }

    #[test]
    fn single_section_single_hunk() {
        let diff = "--- a/A.java\n+++ b/A.java\n@@ -1,2 +1,2 @@\n- a;\n+ b;\n";
        let hunks = parse_diff(diff).unwrap();
        assert_eq!(hunks.len(), 1);
        assert_eq!(
            hunks[0].lines(),
            [
                MarkedLine::new(Marker::Removed, " a;"),
                MarkedLine::new(Marker::Added, " b;")
            ]
        );
    }

    #[test]
    fn context_line_splits_hunks() {
        let diff = "@@ -1,3 +1,3 @@\n-a\n ctx\n+b\n";
        let hunks = parse_diff(diff).unwrap();
        assert_eq!(hunks.len(), 2);
    }

    #[test]
    fn sections_split_hunks() {
        let diff = "@@ -1 +1 @@\n-a\n+b\n@@ -9 +9 @@\n-c\n+d\n";
        assert_eq!(parse_diff(diff).unwrap().len(), 2);
    }

    #[test]
    fn removed_line_that_looks_like_a_header() {
        // "-- comment" removed inside a counted section renders as "--- comment".
        let diff = "--- a/q.sql\n+++ b/q.sql\n@@ -1,1 +1,1 @@\n--- comment\n+++ x\n";
        let hunks = parse_diff(diff).unwrap();
        assert_eq!(
            hunks[0].lines(),
            [
                MarkedLine::new(Marker::Removed, "-- comment"),
                MarkedLine::new(Marker::Added, "++ x")
            ]
        );
    }

    #[test]
    fn multi_file_diff() {
        let diff = "diff --git a/A b/A\nindex 1..2 100644\n--- a/A\n+++ b/A\n@@ -1 +1 @@\n-a\n+b\n\
                    diff --git a/B b/B\n--- a/B\n+++ b/B\n@@ -4,0 +5,1 @@\n+c\n";
        let hunks = parse_diff(diff).unwrap();
        assert_eq!(hunks.len(), 2);
        assert_eq!(hunks[1].lines(), [MarkedLine::new(Marker::Added, "c")]);
    }

    #[test]
    fn bare_lines_without_headers() {
        let hunks = parse_diff("- return x;\n+ return y;\n").unwrap();
        assert_eq!(hunks.len(), 1);
        assert_eq!(hunks[0].lines().len(), 2);
    }

    #[test]
    fn whitespace_only_payload_dropped() {
        let diff = "@@ -1,2 +1,3 @@\n-a\n+   \n+b\n";
        let hunks = parse_diff(diff).unwrap();
        assert_eq!(hunks.len(), 1);
        assert_eq!(hunks[0].lines().len(), 2);
    }

    #[test]
    fn no_newline_marker_ignored() {
        let diff = "@@ -1 +1 @@\n-a\n\\ No newline at end of file\n+b\n";
        let hunks = parse_diff(diff).unwrap();
        assert_eq!(hunks.len(), 1);
        assert_eq!(hunks[0].lines().len(), 2);
    }

    #[test]
    fn crlf_stripped() {
        let hunks = parse_diff("@@ -1 +1 @@\r\n-a\r\n+b\r\n").unwrap();
        assert_eq!(hunks[0].lines()[0].text, "a");
    }

    #[test]
    fn context_only_diff_rejected() {
        assert_eq!(
            parse_diff("@@ -1,2 +1,2 @@\n a\n b\n"),
            Err(TextError::NoChangedLines)
        );
        assert_eq!(parse_diff("just prose\n"), Err(TextError::NoChangedLines));
    }
}
