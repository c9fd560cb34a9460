//! TREC run files: `qid Q0 docid rank score tag`, one line per result.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::IndexError;

/// Ranked results of one query, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub query_id: String,
    pub results: Vec<(String, f64)>,
}

impl RankedList {
    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.results.iter().map(|(d, _)| d.as_str())
    }
}

pub fn format_run(rankings: &[RankedList], tag: &str) -> String {
    let mut out = String::new();
    for r in rankings {
        for (i, (doc, score)) in r.results.iter().enumerate() {
            writeln!(out, "{} Q0 {} {} {} {}", r.query_id, doc, i + 1, score, tag).expect("formatting into a string");
        }
    }
    out
}

pub fn write_run(rankings: &[RankedList], tag: &str, path: &Path) -> Result<(), IndexError> {
    fs::write(path, format_run(rankings, tag))?;
    Ok(())
}

/// Parses run text; results are ordered by the rank column within each query,
/// queries in order of first appearance.
pub fn parse_run(text: &str) -> Result<Vec<RankedList>, IndexError> {
    let mut lists: Vec<(RankedList, Vec<usize>)> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| IndexError::MalformedRun { line: line_no, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(bad(format!("expected 6 fields, found {}", fields.len())));
        }
        let rank: usize = fields[3].parse().map_err(|_| bad(format!("bad rank `{}`", fields[3])))?;
        let score: f64 = fields[4].parse().map_err(|_| bad(format!("bad score `{}`", fields[4])))?;
        let qid = fields[0];
        let pos = match lists.iter().position(|(l, _)| l.query_id == qid) {
            Some(p) => p,
            None => {
                lists.push((RankedList { query_id: qid.to_string(), results: Vec::new() }, Vec::new()));
                lists.len() - 1
            }
        };
        let (list, ranks) = &mut lists[pos];
        if list.results.iter().any(|(d, _)| d == fields[2]) {
            return Err(bad(format!("document `{}` ranked twice for query `{qid}`", fields[2])));
        }
        list.results.push((fields[2].to_string(), score));
        ranks.push(rank);
    }
    Ok(lists
        .into_iter()
        .map(|(mut list, ranks)| {
            let mut order: Vec<usize> = (0..ranks.len()).collect();
            order.sort_by_key(|&i| ranks[i]);
            list.results = order.iter().map(|&i| list.results[i].clone()).collect();
            list
        })
        .collect())
}

pub fn read_run(path: &Path) -> Result<Vec<RankedList>, IndexError> {
    parse_run(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lists() -> Vec<RankedList> {
        (0..2)
            .map(|q| RankedList {
                query_id: format!("q{q}"),
                results: (0..5).map(|d| (format!("d{d}"), 1.0 / (d as f64 + 3.0))).collect(),
            })
            .collect()
    }

    #[test]
    fn roundtrip() {
        let text = format_run(&lists(), "run1");
        assert_eq!(text.lines().count(), 10);
        assert_eq!(text.lines().nth(1).unwrap().split(' ').nth(3), Some("2"));
        assert_eq!(parse_run(&text).unwrap(), lists());
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.txt");
        write_run(&lists(), "run1", &p).unwrap();
        assert_eq!(read_run(&p).unwrap(), lists());
    }

    #[test]
    fn malformed_lines() {
        let err = parse_run("q1 Q0 d1 1 0.5 t\nq1 Q0 d2 x 0.4 t\n").unwrap_err();
        assert!(matches!(err, IndexError::MalformedRun { line: 2, .. }));
        assert!(matches!(parse_run("q1 Q0 d1 1 0.5").unwrap_err(), IndexError::MalformedRun { line: 1, .. }));
        assert!(matches!(parse_run("q Q0 d 1 1 t\nq Q0 d 2 1 t").unwrap_err(), IndexError::MalformedRun { line: 2, .. }));
    }
}
