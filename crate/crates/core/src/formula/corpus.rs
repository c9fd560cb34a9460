//! Line-oriented corpus files: one `{"id": ..., "latex": ...}` object per line,
//! `#` comment lines and blank lines skipped.

use std::collections::HashSet;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::FormulaAst;
use super::parser::{parse_formula, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    pub latex: String,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate formula id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: formula `{id}`: {source}")]
    Syntax {
        line: usize,
        id: String,
        #[source]
        source: SyntaxError,
    },
}

/// Reads records without parsing the formulas.
pub fn read_records(path: &Path) -> Result<Vec<(usize, CorpusRecord)>, CorpusError> {
    let text = fs::read_to_string(path)?;
    parse_records(&text)
}

pub fn parse_records(text: &str) -> Result<Vec<(usize, CorpusRecord)>, CorpusError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let rec: CorpusRecord = serde_json::from_str(trimmed)
            .map_err(|e| CorpusError::Malformed { line, message: e.to_string() })?;
        if !seen.insert(rec.id.clone()) {
            return Err(CorpusError::DuplicateId { line, id: rec.id });
        }
        out.push((line, rec));
    }
    Ok(out)
}

/// Loads and parses a corpus file, preserving file order.
pub fn load_corpus(path: &Path) -> Result<Vec<(String, FormulaAst)>, CorpusError> {
    let text = fs::read_to_string(path)?;
    parse_corpus(&text)
}

pub fn parse_corpus(text: &str) -> Result<Vec<(String, FormulaAst)>, CorpusError> {
    parse_records(text)?
        .into_iter()
        .map(|(line, rec)| match parse_formula(&rec.latex) {
            Ok(ast) => Ok((rec.id, ast)),
            Err(source) => Err(CorpusError::Syntax { line, id: rec.id, source }),
        })
        .collect()
}

pub fn write_records<'a>(
    mut w: impl Write,
    records: impl IntoIterator<Item = &'a CorpusRecord>,
) -> io::Result<()> {
    for r in records {
        let line = serde_json::to_string(r).map_err(io::Error::other)?;
        writeln!(w, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_file_order() {
        let text = "# header\n{\"id\":\"f1\",\"latex\":\"x+y\"}\n\n{\"id\":\"f2\",\"latex\":\"a\"}\n";
        let c = parse_corpus(text).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].0, "f1");
        assert_eq!(c[1].0, "f2");
    }

    #[test]
    fn duplicate_id() {
        let text = "{\"id\":\"f1\",\"latex\":\"x\"}\n{\"id\":\"f1\",\"latex\":\"y\"}\n";
        match parse_corpus(text).unwrap_err() {
            CorpusError::DuplicateId { id, line } => {
                assert_eq!(id, "f1");
                assert_eq!(line, 2);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn syntax_error_carries_line_and_id() {
        let mut text = String::new();
        for i in 1..17 {
            text.push_str(&format!("{{\"id\":\"f{i}\",\"latex\":\"x\"}}\n"));
        }
        text.push_str("{\"id\":\"bad\",\"latex\":\"x+\"}\n");
        match parse_corpus(&text).unwrap_err() {
            CorpusError::Syntax { line, id, source } => {
                assert_eq!(line, 17);
                assert_eq!(id, "bad");
                assert_eq!(source.offset, 2);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn malformed_json() {
        assert!(matches!(
            parse_corpus("{\"id\": 3}").unwrap_err(),
            CorpusError::Malformed { line: 1, .. }
        ));
    }
}
