//! Graded judgments in TREC qrels format: `qid 0 docid score`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::EvalError;

pub const MAX_SCORE: u8 = 4;

/// `query id → (formula id → score)`
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QRels {
    judgments: BTreeMap<String, BTreeMap<String, u8>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelevanceSetting {
    /// Score ≥ 3 is relevant; everything else judged is non-relevant.
    Full,
    /// Score ≥ 1 is relevant; score 0 is non-relevant.
    Partial,
}

impl RelevanceSetting {
    pub const ALL: [RelevanceSetting; 2] = [RelevanceSetting::Full, RelevanceSetting::Partial];

    pub fn name(self) -> &'static str {
        match self {
            RelevanceSetting::Full => "full",
            RelevanceSetting::Partial => "partial",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Some(RelevanceSetting::Full),
            "partial" => Some(RelevanceSetting::Partial),
            _ => None,
        }
    }

    pub fn threshold(self) -> u8 {
        match self {
            RelevanceSetting::Full => 3,
            RelevanceSetting::Partial => 1,
        }
    }
}

/// Binary judgments of one query.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Judgments {
    pub relevant: BTreeSet<String>,
    pub nonrelevant: BTreeSet<String>,
}

impl QRels {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fails on out-of-range scores and repeated pairs.
    pub fn insert(&mut self, qid: &str, docid: &str, score: u8) -> Result<(), EvalError> {
        if score > MAX_SCORE {
            return Err(EvalError::Range { line: 0, score: score as i64 });
        }
        let q = self.judgments.entry(qid.to_string()).or_default();
        if q.contains_key(docid) {
            return Err(EvalError::DuplicateJudgment { line: 0, qid: qid.into(), docid: docid.into() });
        }
        q.insert(docid.to_string(), score);
        Ok(())
    }

    pub fn get(&self, qid: &str, docid: &str) -> Option<u8> {
        self.judgments.get(qid)?.get(docid).copied()
    }

    pub fn len(&self) -> usize {
        self.judgments.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn query_ids(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, u8)> {
        self.judgments
            .iter()
            .flat_map(|(q, docs)| docs.iter().map(move |(d, &s)| (q.as_str(), d.as_str(), s)))
    }

    /// One `qid 0 docid score` line per judgment, sorted by query then doc.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (q, d, s) in self.iter() {
            writeln!(out, "{q} 0 {d} {s}").expect("formatting into a string");
        }
        out
    }
}

pub fn parse_qrels(text: &str) -> Result<QRels, EvalError> {
    let mut qrels = QRels::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(EvalError::MalformedQrels { line, message: format!("expected 4 fields, found {}", fields.len()) });
        }
        let score: i64 = fields[3]
            .parse()
            .map_err(|_| EvalError::MalformedQrels { line, message: format!("bad score `{}`", fields[3]) })?;
        if !(0..=MAX_SCORE as i64).contains(&score) {
            return Err(EvalError::Range { line, score });
        }
        qrels.insert(fields[0], fields[2], score as u8).map_err(|e| match e {
            EvalError::DuplicateJudgment { qid, docid, .. } => EvalError::DuplicateJudgment { line, qid, docid },
            other => other,
        })?;
    }
    Ok(qrels)
}

pub fn load_qrels(path: &Path) -> Result<QRels, EvalError> {
    parse_qrels(&fs::read_to_string(path)?)
}

/// Splits every query's judged documents into relevant and non-relevant
/// sets; unjudged documents are in neither.
pub fn binarize(qrels: &QRels, setting: RelevanceSetting) -> BTreeMap<String, Judgments> {
    qrels
        .judgments
        .iter()
        .map(|(q, docs)| {
            let mut j = Judgments::default();
            for (d, &s) in docs {
                if s >= setting.threshold() {
                    j.relevant.insert(d.clone());
                } else {
                    j.nonrelevant.insert(d.clone());
                }
            }
            (q.clone(), j)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_errors() {
        let q = parse_qrels("q1 0 a 3\nq1 0 b 1\n\nq2 0 a 0\n").unwrap();
        assert_eq!(q.len(), 3);
        assert_eq!(q.get("q1", "b"), Some(1));
        assert_eq!(parse_qrels(&q.to_text()).unwrap(), q);
        assert!(matches!(parse_qrels("q1 0 a 5"), Err(EvalError::Range { line: 1, score: 5 })));
        assert!(matches!(parse_qrels("q1 0 a -1"), Err(EvalError::Range { .. })));
        assert!(matches!(
            parse_qrels("q1 0 a 3\nq1 0 a 2"),
            Err(EvalError::DuplicateJudgment { line: 2, .. })
        ));
        assert!(matches!(parse_qrels("q1 0 a"), Err(EvalError::MalformedQrels { line: 1, .. })));
        assert!(matches!(parse_qrels("q1 0 a x"), Err(EvalError::MalformedQrels { .. })));
    }

    #[test]
    fn thresholds() {
        let q = parse_qrels("q 0 s3 3\nq 0 s1 1\nq 0 s0 0\nq 0 s4 4\nq 0 s2 2").unwrap();
        let full = &binarize(&q, RelevanceSetting::Full)["q"];
        let partial = &binarize(&q, RelevanceSetting::Partial)["q"];
        assert!(full.relevant.contains("s3") && full.relevant.contains("s4"));
        assert!(full.nonrelevant.contains("s1") && full.nonrelevant.contains("s2") && full.nonrelevant.contains("s0"));
        assert!(partial.relevant.contains("s1"));
        assert_eq!(partial.nonrelevant.iter().collect::<Vec<_>>(), vec!["s0"]);
        assert!(full.relevant.is_subset(&partial.relevant));
    }
}
