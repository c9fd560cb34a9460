use std::collections::BTreeMap;

use crate::index::RankedList;

use super::qrels::Judgments;
use super::EvalError;

/// TREC bpref of one ranking:
///
/// ```text
/// bpref = 1/|R| · Σ_{r ∈ R retrieved} (1 − min(#n ranked above r, |R|) / min(|R|, |N|))
/// ```
///
/// where `n` ranges over retrieved judged non-relevant documents. Unjudged
/// documents are ignored. With `|N| = 0` every retrieved relevant document
/// contributes 1.
pub fn bpref<'a>(ranking: impl IntoIterator<Item = &'a str>, judgments: &Judgments) -> Result<f64, EvalError> {
    let r = judgments.relevant.len();
    if r == 0 {
        return Err(EvalError::NoRelevantJudgments);
    }
    let n = judgments.nonrelevant.len();
    let denom = r.min(n);
    let mut nonrel_above = 0usize;
    let mut sum = 0.0;
    for doc in ranking {
        if judgments.relevant.contains(doc) {
            sum += if denom == 0 { 1.0 } else { 1.0 - nonrel_above.min(r) as f64 / denom as f64 };
        } else if judgments.nonrelevant.contains(doc) {
            nonrel_above += 1;
        }
    }
    Ok(sum / r as f64)
}

/// Per-query bpref and its macro average.
#[derive(Debug, Clone, PartialEq)]
pub struct RunScore {
    pub mean: f64,
    pub per_query: BTreeMap<String, f64>,
    /// Judged queries without any relevant document; excluded from the mean.
    pub skipped: Vec<String>,
}

/// Scores every judged query. A judged query missing from `rankings` is
/// scored against an empty ranking.
pub fn evaluate(rankings: &[RankedList], judgments: &BTreeMap<String, Judgments>) -> RunScore {
    let by_query: BTreeMap<&str, &RankedList> = rankings.iter().map(|r| (r.query_id.as_str(), r)).collect();
    let mut per_query = BTreeMap::new();
    let mut skipped = Vec::new();
    for (q, j) in judgments {
        let docs: Vec<&str> = by_query.get(q.as_str()).map(|r| r.doc_ids().collect()).unwrap_or_default();
        match bpref(docs, j) {
            Ok(s) => {
                per_query.insert(q.clone(), s);
            }
            Err(_) => skipped.push(q.clone()),
        }
    }
    let mean = if per_query.is_empty() { 0.0 } else { per_query.values().sum::<f64>() / per_query.len() as f64 };
    RunScore { mean, per_query, skipped }
}
