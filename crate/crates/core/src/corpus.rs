//! Report records and their line-delimited JSON storage.
//!
//! One report per line: `{"id": "...", "text": "...", "label": 3}` where the
//! label is optional and, when present, lies in `1..=5`.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A raw free-text report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<u8>,
}

impl Report {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: Option<u8>) -> Self {
        Report {
            id: id.into(),
            text: text.into(),
            label,
        }
    }

    /// Number of Unicode-whitespace separated tokens in the raw text.
    pub fn raw_token_count(&self) -> usize {
        self.text.split_whitespace().count()
    }
}

/// A report after condensing (and possibly dictionary mapping).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CondensedReport {
    pub id: String,
    pub tokens: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<u8>,
    /// Set when condensing left no tokens.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

impl CondensedReport {
    pub fn new(id: impl Into<String>, tokens: Vec<String>, label: Option<u8>) -> Self {
        let degenerate = tokens.is_empty();
        CondensedReport {
            id: id.into(),
            tokens,
            label,
            degenerate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub report_count: usize,
    pub mean_tokens_raw: f64,
    pub mean_tokens_condensed: f64,
    /// `mean_tokens_raw / mean_tokens_condensed`, or 0 when nothing survived condensing.
    pub reduction_ratio: f64,
}

fn validate_label(label: Option<u8>, line: usize) -> Result<()> {
    match label {
        Some(l) if !(1..=5).contains(&l) => Err(Error::Validation(format!("line {line}: label {l} outside 1..=5"))),
        _ => Ok(()),
    }
}

/// Parses reports from any line-oriented reader. Blank lines are skipped.
pub fn read_reports<R: BufRead>(reader: R) -> Result<Vec<Report>> {
    #[derive(Deserialize)]
    struct Line {
        id: String,
        text: String,
        #[serde(default)]
        label: Option<i64>,
    }

    let mut seen = HashSet::new();
    let mut reports = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: Line = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let label = match raw.label {
            None => None,
            Some(l) if (1..=5).contains(&l) => Some(l as u8),
            Some(l) => return Err(Error::Validation(format!("line {lineno}: label {l} outside 1..=5"))),
        };
        if !seen.insert(raw.id.clone()) {
            return Err(Error::Validation(format!(
                "line {lineno}: duplicate report id {:?}",
                raw.id
            )));
        }
        reports.push(Report {
            id: raw.id,
            text: raw.text,
            label,
        });
    }
    Ok(reports)
}

pub fn load_reports(path: impl AsRef<Path>) -> Result<Vec<Report>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_reports(BufReader::new(file))
}

pub fn write_reports<W: Write>(mut writer: W, reports: &[Report]) -> Result<()> {
    for (i, r) in reports.iter().enumerate() {
        validate_label(r.label, i + 1)?;
        let line = serde_json::to_string(r).expect("report serializes");
        writeln!(writer, "{line}").map_err(|e| Error::io("<writer>", e))?;
    }
    Ok(())
}

pub fn save_reports(path: impl AsRef<Path>, reports: &[Report]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_reports(&mut w, reports)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_condensed(path: impl AsRef<Path>) -> Result<Vec<CondensedReport>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let r: CondensedReport = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        validate_label(r.label, i + 1)?;
        if !seen.insert(r.id.clone()) {
            return Err(Error::Validation(format!(
                "line {}: duplicate report id {:?}",
                i + 1,
                r.id
            )));
        }
        out.push(r);
    }
    Ok(out)
}

pub fn save_condensed(path: impl AsRef<Path>, reports: &[CondensedReport]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in reports {
        let line = serde_json::to_string(r).expect("report serializes");
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Mean raw and condensed lengths over two views of the same corpus.
pub fn corpus_stats(raw: &[Report], condensed: &[CondensedReport]) -> Result<CorpusStats> {
    if raw.is_empty() || condensed.is_empty() {
        return Err(Error::Validation("corpus_stats needs a non-empty corpus".into()));
    }
    let raw_ids: HashSet<&str> = raw.iter().map(|r| r.id.as_str()).collect();
    let condensed_ids: HashSet<&str> = condensed.iter().map(|r| r.id.as_str()).collect();
    if raw_ids != condensed_ids || raw_ids.len() != raw.len() || condensed_ids.len() != condensed.len() {
        return Err(Error::Validation(
            "raw and condensed corpora do not share the same id set".into(),
        ));
    }
    // Integer totals keep the means independent of report order.
    let raw_total: usize = raw.iter().map(Report::raw_token_count).sum();
    let condensed_total: usize = condensed.iter().map(|r| r.tokens.len()).sum();
    let n = raw.len() as f64;
    let mean_raw = raw_total as f64 / n;
    let mean_condensed = condensed_total as f64 / n;
    let reduction_ratio = if mean_condensed > 0.0 {
        mean_raw / mean_condensed
    } else {
        0.0
    };
    Ok(CorpusStats {
        report_count: raw.len(),
        mean_tokens_raw: mean_raw,
        mean_tokens_condensed: mean_condensed,
        reduction_ratio,
    })
}
