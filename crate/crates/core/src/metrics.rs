//! Scoring of model outputs against eval golds.
//!
//! Rouge-L here is the sentence-level LCS F1 (beta = 1) over tokens obtained
//! by lowercasing, replacing every non-alphanumeric character with a space,
//! and splitting on whitespace.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compile::{EvalExample, EvalTask, Scoring};
use crate::experience::{read_jsonl, ExperienceError};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("empty path")]
    EmptyPath,
    #[error("no prediction for {0}")]
    MissingPrediction(String),
    #[error("prediction {0} matches no eval example")]
    ExtraPrediction(String),
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("eval set is empty")]
    EmptyEval,
    #[error(transparent)]
    Read(#[from] ExperienceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    RougeL,
    LcsNorm,
    Accuracy,
}

impl From<Scoring> for Metric {
    fn from(s: Scoring) -> Self {
        match s {
            Scoring::RougeL => Metric::RougeL,
            Scoring::Lcs => Metric::LcsNorm,
            Scoring::Accuracy => Metric::Accuracy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub task: EvalTask,
    pub metric: Metric,
    /// Mean per-example score in [0, 1].
    pub value: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub output: String,
}

/// Length of the longest common subsequence.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect::<String>()
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

/// LCS F-measure over token sequences.
pub fn rouge_l_tokens<T: PartialEq>(cand: &[T], reference: &[T]) -> f64 {
    match (cand.is_empty(), reference.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    // 2PR/(P+R) with P = L/|c| and R = L/|r| reduces to 2L/(|c|+|r|).
    2.0 * lcs_len(cand, reference) as f64 / (cand.len() + reference.len()) as f64
}

pub fn rouge_l(candidate: &str, reference: &str) -> f64 {
    rouge_l_tokens(&tokenize(candidate), &tokenize(reference))
}

/// LCS length divided by the longer of the two paths.
pub fn lcs_normalized<T: PartialEq>(pred: &[T], gold: &[T]) -> Result<f64, MetricError> {
    if pred.is_empty() || gold.is_empty() {
        return Err(MetricError::EmptyPath);
    }
    Ok(lcs_len(pred, gold) as f64 / pred.len().max(gold.len()) as f64)
}

/// Splits a path answer such as `kitchen, living room, bedroom`.
pub fn parse_path(text: &str) -> Vec<String> {
    text.split(',').map(|s| s.trim().to_lowercase()).filter(|s| !s.is_empty()).collect()
}

fn canonical(text: &str) -> String {
    text.trim().to_lowercase()
}

/// Score of one output under the task's metric.
pub fn score_example(e: &EvalExample, output: &str) -> f64 {
    match e.scoring {
        Scoring::RougeL => rouge_l(output, &e.gold),
        // An empty or unparsable path answer shares nothing with the gold.
        Scoring::Lcs => lcs_normalized(&parse_path(output), &parse_path(&e.gold)).unwrap_or(0.0),
        Scoring::Accuracy => f64::from(u8::from(canonical(output) == canonical(&e.gold))),
    }
}

/// Per-task mean scores; predictions must cover the eval set exactly.
pub fn score(predictions: &[Prediction], eval: &[EvalExample]) -> Result<Vec<ScoreReport>, MetricError> {
    if eval.is_empty() {
        return Err(MetricError::EmptyEval);
    }
    let mut by_id: BTreeMap<&str, &str> = BTreeMap::new();
    for p in predictions {
        if by_id.insert(&p.id, &p.output).is_some() {
            return Err(MetricError::DuplicateId(p.id.clone()));
        }
    }
    let mut ids = BTreeSet::new();
    for e in eval {
        if !ids.insert(e.id.as_str()) {
            return Err(MetricError::DuplicateId(e.id.clone()));
        }
        if !by_id.contains_key(e.id.as_str()) {
            return Err(MetricError::MissingPrediction(e.id.clone()));
        }
    }
    if let Some(extra) = by_id.keys().find(|k| !ids.contains(*k)) {
        return Err(MetricError::ExtraPrediction(extra.to_string()));
    }
    let scores: Vec<(EvalTask, f64)> =
        eval.par_iter().map(|e| (e.task, score_example(e, by_id[e.id.as_str()]))).collect();
    let mut sums: BTreeMap<EvalTask, (f64, usize)> = BTreeMap::new();
    for (t, s) in scores {
        let entry = sums.entry(t).or_default();
        entry.0 += s;
        entry.1 += 1;
    }
    Ok(sums
        .into_iter()
        .map(|(task, (sum, n))| ScoreReport { task, metric: task.scoring().into(), value: sum / n as f64, n })
        .collect())
}

/// Reads a predictions JSONL file and an eval JSONL file and scores them.
pub fn score_file(predictions: &Path, eval: &Path) -> Result<Vec<ScoreReport>, MetricError> {
    let preds: Vec<Prediction> = read_jsonl(predictions)?;
    let examples: Vec<EvalExample> = read_jsonl(eval)?;
    score(&preds, &examples)
}

/// Plain-text rendering of reports, values shown ×100.
pub fn format_reports(reports: &[ScoreReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let metric = serde_json::to_value(r.metric).expect("unit enum");
        out.push_str(&format!(
            "{:<28} {:<9} {:>6.2}  n={}\n",
            r.task.name(),
            metric.as_str().unwrap_or(""),
            r.value * 100.0,
            r.n
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Longest common subsequence by trying every subsequence of `a`.
    fn brute_lcs(a: &[u8], b: &[u8]) -> usize {
        let mut best = 0;
        for mask in 0u32..(1 << a.len()) {
            let sub: Vec<u8> = (0..a.len()).filter(|i| mask & (1 << i) != 0).map(|i| a[i]).collect();
            let mut it = b.iter();
            if sub.iter().all(|x| it.any(|y| y == x)) {
                best = best.max(sub.len());
            }
        }
        best
    }

    #[test]
    fn hand_cases() {
        assert_eq!(rouge_l("walk to kitchen", "walk to living room"), 4.0 / 7.0);
        assert_eq!(lcs_normalized(&["kitchen", "bedroom"], &["kitchen", "living room", "bedroom"]).unwrap(), 2.0 / 3.0);
        assert_eq!(rouge_l("Walk to sofa.", "walk to SOFA"), 1.0);
        assert_eq!(rouge_l("a b", "c d"), 0.0);
        assert_eq!(rouge_l("", ""), 1.0);
        assert_eq!(rouge_l("", "x"), 0.0);
        assert_eq!(rouge_l("...", "x"), 0.0);
        assert!(matches!(lcs_normalized::<u8>(&[], &[1]), Err(MetricError::EmptyPath)));
        assert_eq!(parse_path("kitchen,  Living room ,bedroom"), ["kitchen", "living room", "bedroom"]);
    }

    #[test]
    fn lcs_matches_brute_force_small() {
        for (a, b) in [(&b"abcb"[..], &b"bdcab"[..]), (b"", b"ab"), (b"aaaa", b"aa")] {
            assert_eq!(lcs_len(a, b), brute_lcs(a, b));
        }
    }

    proptest! {
        #[test]
        fn lcs_agrees_with_enumeration(a in prop::collection::vec(0u8..4, 0..=6), b in prop::collection::vec(0u8..4, 0..=6)) {
            prop_assert_eq!(lcs_len(&a, &b), brute_lcs(&a, &b));
        }

        #[test]
        fn bounds_and_symmetry(a in prop::collection::vec(0u8..4, 1..=8), b in prop::collection::vec(0u8..4, 1..=8)) {
            let ab = lcs_normalized(&a, &b).unwrap();
            prop_assert_eq!(ab, lcs_normalized(&b, &a).unwrap());
            prop_assert!((0.0..=1.0).contains(&ab));
            let r = rouge_l_tokens(&a, &b);
            prop_assert!((0.0..=1.0).contains(&r));
            prop_assert_eq!(rouge_l_tokens(&a, &a), 1.0);
        }
    }
}
