//! Classification and ranking metrics over assessed predictions.
//!
//! The positive class is `correct`. Recall and F1 read verdicts only;
//! AUC reads scores only (Mann–Whitney, ties count one half).

use crate::corpus::Label;
use crate::predictor::{rank_candidates, PredictionRecord, Verdict};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("need at least one item labeled {0}")]
    MissingClass(&'static str),
    #[error("no ranked list contains a correct item")]
    NoRelevantAnywhere,
    #[error("ranked list {0} is empty")]
    EmptyList(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Correct,
    Incorrect,
}

impl Class {
    pub fn from_label(label: Label) -> Option<Self> {
        match label {
            Label::Correct => Some(Class::Correct),
            Label::Incorrect => Some(Class::Incorrect),
            Label::Unlabeled => None,
        }
    }

    pub fn from_verdict(verdict: Verdict) -> Option<Self> {
        match verdict {
            Verdict::Correct => Some(Class::Correct),
            Verdict::Incorrect => Some(Class::Incorrect),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledScore {
    pub patch_id: String,
    pub score: f64,
    pub label: Class,
    pub verdict: Class,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn of(items: &[LabeledScore]) -> Self {
        let mut c = Confusion::default();
        for it in items {
            match (it.label, it.verdict) {
                (Class::Correct, Class::Correct) => c.tp += 1,
                (Class::Correct, Class::Incorrect) => c.fn_ += 1,
                (Class::Incorrect, Class::Correct) => c.fp += 1,
                (Class::Incorrect, Class::Incorrect) => c.tn += 1,
            }
        }
        c
    }
}

/// `(+Recall, −Recall)` = `(TP/(TP+FN), TN/(TN+FP))`.
pub fn pos_neg_recall(items: &[LabeledScore]) -> Result<(f64, f64), MetricError> {
    Ok((pos_recall(items)?, neg_recall(items)?))
}

pub fn pos_recall(items: &[LabeledScore]) -> Result<f64, MetricError> {
    let c = Confusion::of(items);
    if c.tp + c.fn_ == 0 {
        return Err(MetricError::MissingClass("correct"));
    }
    Ok(c.tp as f64 / (c.tp + c.fn_) as f64)
}

pub fn neg_recall(items: &[LabeledScore]) -> Result<f64, MetricError> {
    let c = Confusion::of(items);
    if c.tn + c.fp == 0 {
        return Err(MetricError::MissingClass("incorrect"));
    }
    Ok(c.tn as f64 / (c.tn + c.fp) as f64)
}

/// Rank-based AUC: the probability that a random correct item outscores a
/// random incorrect one, ties counting one half.
pub fn auc(items: &[LabeledScore]) -> Result<f64, MetricError> {
    let n_pos = items.iter().filter(|i| i.label == Class::Correct).count();
    let n_neg = items.len() - n_pos;
    if n_pos == 0 {
        return Err(MetricError::MissingClass("correct"));
    }
    if n_neg == 0 {
        return Err(MetricError::MissingClass("incorrect"));
    }

    let mut order: Vec<&LabeledScore> = items.iter().collect();
    order.sort_by(|a, b| a.score.total_cmp(&b.score));

    // Walk tie groups in ascending score; each positive beats every
    // negative below its group and half-beats the negatives inside it.
    // Counts stay integral (doubled) so the result is exact up to one division.
    let mut negs_below = 0usize;
    let mut doubled_wins = 0u128;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && order[j].score.total_cmp(&order[i].score) == Ordering::Equal {
            j += 1;
        }
        let group = &order[i..j];
        let pos = group.iter().filter(|x| x.label == Class::Correct).count();
        let neg = group.len() - pos;
        doubled_wins += (2 * pos * negs_below + pos * neg) as u128;
        negs_below += neg;
        i = j;
    }
    Ok(doubled_wins as f64 / (2.0 * n_pos as f64 * n_neg as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F1Score {
    pub value: f64,
    /// Set when no correct item was predicted correct; `value` is then 0.
    pub degenerate: bool,
}

/// Harmonic mean of precision and recall for the `correct` class.
pub fn f1(items: &[LabeledScore]) -> Result<F1Score, MetricError> {
    let c = Confusion::of(items);
    if c.tp + c.fn_ == 0 {
        return Err(MetricError::MissingClass("correct"));
    }
    if c.tp == 0 {
        return Ok(F1Score {
            value: 0.0,
            degenerate: true,
        });
    }
    // 2PR/(P+R) reduced to counts: one rounding instead of four
    Ok(F1Score {
        value: (2 * c.tp) as f64 / (2 * c.tp + c.fp + c.fn_) as f64,
        degenerate: false,
    })
}

/// Average precision of one ranked relevance list; `None` when it has no
/// relevant item.
pub fn average_precision(ranked: &[bool]) -> Option<f64> {
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (j, &rel) in ranked.iter().enumerate() {
        if rel {
            hits += 1;
            sum += hits as f64 / (j + 1) as f64;
        }
    }
    (hits > 0).then(|| sum / hits as f64)
}

pub fn reciprocal_rank(ranked: &[bool]) -> Option<f64> {
    ranked
        .iter()
        .position(|&r| r)
        .map(|p| 1.0 / (p + 1) as f64)
}

/// `(MAP, MRR)` over per-bug ranked lists (`true` = correct), skipping
/// lists without a correct item.
pub fn map_mrr(ranked_lists: &[Vec<bool>]) -> Result<(f64, f64), MetricError> {
    let mut ap_sum = 0.0;
    let mut rr_sum = 0.0;
    let mut n = 0usize;
    for (i, list) in ranked_lists.iter().enumerate() {
        if list.is_empty() {
            return Err(MetricError::EmptyList(i));
        }
        if let (Some(ap), Some(rr)) = (average_precision(list), reciprocal_rank(list)) {
            ap_sum += ap;
            rr_sum += rr;
            n += 1;
        }
    }
    if n == 0 {
        return Err(MetricError::NoRelevantAnywhere);
    }
    Ok((ap_sum / n as f64, rr_sum / n as f64))
}

/// Metrics for one prediction run. `None` marks a metric that is undefined
/// for the assessed population (a class is missing).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub auc: Option<f64>,
    pub f1: Option<f64>,
    pub pos_recall: Option<f64>,
    pub neg_recall: Option<f64>,
    pub map: Option<f64>,
    pub mrr: Option<f64>,
    pub counts: Confusion,
    pub n_assessed: usize,
    pub n_correct: usize,
    pub n_incorrect: usize,
    /// Candidates left out: abstained, errored, or unlabeled.
    pub n_unassessed: usize,
}

/// Pairs decided records with labels; everything else is unassessed.
pub fn assessed_items(
    records: &[PredictionRecord],
    labels: &HashMap<String, Label>,
) -> (Vec<LabeledScore>, usize) {
    let mut items = Vec::new();
    let mut skipped = 0;
    for r in records {
        let label = labels.get(&r.patch_id).copied().and_then(Class::from_label);
        match (label, Class::from_verdict(r.verdict), r.score) {
            (Some(label), Some(verdict), Some(score)) => items.push(LabeledScore {
                patch_id: r.patch_id.clone(),
                score,
                label,
                verdict,
            }),
            _ => skipped += 1,
        }
    }
    (items, skipped)
}

/// Full report. `bug_of` groups records into per-bug ranked lists for
/// MAP/MRR.
pub fn evaluate(
    records: &[PredictionRecord],
    labels: &HashMap<String, Label>,
    bug_of: &HashMap<String, String>,
) -> MetricReport {
    let (items, skipped) = assessed_items(records, labels);

    let mut per_bug: indexmap::IndexMap<&str, Vec<PredictionRecord>> = indexmap::IndexMap::new();
    let assessed: std::collections::HashSet<&str> =
        items.iter().map(|i| i.patch_id.as_str()).collect();
    for r in records.iter().filter(|r| assessed.contains(r.patch_id.as_str())) {
        let bug = bug_of.get(&r.patch_id).map_or("", String::as_str);
        per_bug.entry(bug).or_default().push(r.clone());
    }
    let lists: Vec<Vec<bool>> = per_bug
        .into_values()
        .map(|recs| {
            rank_candidates(recs)
                .iter()
                .map(|r| labels.get(&r.patch_id) == Some(&Label::Correct))
                .collect()
        })
        .collect();
    let ranking = map_mrr(&lists).ok();

    let n_correct = items.iter().filter(|i| i.label == Class::Correct).count();
    MetricReport {
        auc: auc(&items).ok(),
        f1: f1(&items).ok().map(|f| f.value),
        pos_recall: pos_recall(&items).ok(),
        neg_recall: neg_recall(&items).ok(),
        map: ranking.map(|r| r.0),
        mrr: ranking.map(|r| r.1),
        counts: Confusion::of(&items),
        n_assessed: items.len(),
        n_correct,
        n_incorrect: items.len() - n_correct,
        n_unassessed: skipped,
    }
}

pub const CSV_HEADER: &str = "t_test,n_correct,n_incorrect,auc,f1,pos_recall,neg_recall,map,mrr";

impl MetricReport {
    /// One sweep-table row; undefined metrics are left blank.
    pub fn csv_row(&self, t_test: f64) -> String {
        let cell = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            t_test,
            self.n_correct,
            self.n_incorrect,
            cell(self.auc),
            cell(self.f1),
            cell(self.pos_recall),
            cell(self.neg_recall),
            cell(self.map),
            cell(self.mrr),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn item(score: f64, label: Class, verdict: Class) -> LabeledScore {
        LabeledScore {
            patch_id: String::new(),
            score,
            label,
            verdict,
        }
    }

    fn counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Vec<LabeledScore> {
        use Class::*;
        let mut v = Vec::new();
        v.extend((0..tp).map(|_| item(1.0, Correct, Correct)));
        v.extend((0..fp).map(|_| item(1.0, Incorrect, Correct)));
        v.extend((0..tn).map(|_| item(0.0, Incorrect, Incorrect)));
        v.extend((0..fn_).map(|_| item(0.0, Correct, Incorrect)));
        v
    }

    #[test]
    fn recalls() {
        assert_eq!(pos_neg_recall(&counts(3, 0, 2, 0)).unwrap(), (1.0, 1.0));
        assert_eq!(pos_recall(&counts(3, 0, 1, 1)).unwrap(), 0.75);
        let neg = neg_recall(&counts(48, 28, 29, 9)).unwrap();
        assert!((neg - 29.0 / 57.0).abs() < 1e-15);
        assert_eq!(format!("{neg:.3}"), "0.509");
        assert_eq!(
            pos_neg_recall(&counts(1, 0, 0, 0)),
            Err(MetricError::MissingClass("incorrect"))
        );
    }

    #[test]
    fn auc_points() {
        use Class::*;
        let sep = [item(0.9, Correct, Correct), item(0.1, Incorrect, Incorrect)];
        assert_eq!(auc(&sep).unwrap(), 1.0);
        let ties = [item(0.3, Correct, Correct), item(0.3, Incorrect, Correct), item(0.3, Correct, Correct)];
        assert_eq!(auc(&ties).unwrap(), 0.5);
        let mixed = [
            item(0.9, Correct, Correct),
            item(0.4, Correct, Incorrect),
            item(0.6, Incorrect, Correct),
            item(0.2, Incorrect, Incorrect),
        ];
        assert_eq!(auc(&mixed).unwrap(), 0.75);
        assert!(auc(&sep[..1]).is_err());
    }

    #[test]
    fn f1_points() {
        assert_eq!(f1(&counts(2, 0, 3, 0)).unwrap().value, 1.0);
        // P = 1, R = 0.5
        assert!((f1(&counts(1, 0, 0, 1)).unwrap().value - 2.0 / 3.0).abs() < 1e-15);
        let best = f1(&counts(48, 28, 29, 9)).unwrap().value;
        assert_eq!(format!("{best:.3}"), "0.722");
        let degenerate = f1(&counts(0, 2, 1, 3)).unwrap();
        assert!(degenerate.degenerate);
        assert_eq!(degenerate.value, 0.0);
        assert!(f1(&counts(0, 1, 1, 0)).is_err());
    }

    #[test]
    fn ranking_points() {
        assert_eq!(map_mrr(&[vec![true, false], vec![true]]).unwrap(), (1.0, 1.0));
        assert_eq!(map_mrr(&[vec![false, true]]).unwrap().1, 0.5);
        let (map, _) = map_mrr(&[vec![true, false, true]]).unwrap();
        assert!((map - 5.0 / 6.0).abs() < 1e-15);
        // lists without a correct item are skipped
        assert_eq!(map_mrr(&[vec![false], vec![true]]).unwrap(), (1.0, 1.0));
        assert_eq!(map_mrr(&[vec![false]]), Err(MetricError::NoRelevantAnywhere));
        assert_eq!(map_mrr(&[vec![]]), Err(MetricError::EmptyList(0)));
    }

    #[test]
    fn csv_row_blanks() {
        let r = MetricReport {
            auc: None,
            f1: Some(1.0),
            pos_recall: Some(1.0),
            neg_recall: None,
            map: Some(1.0),
            mrr: Some(1.0),
            counts: Confusion::default(),
            n_assessed: 2,
            n_correct: 2,
            n_incorrect: 0,
            n_unassessed: 0,
        };
        assert_eq!(r.csv_row(0.8), "0.8,2,0,,1.000000,1.000000,,1.000000,1.000000");
    }
}
