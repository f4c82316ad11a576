use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One timestamped text (an announcement, article, filing...).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub timestamp: NaiveDate,
    pub body: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    /// One JSON object per line: `{"id": ..., "date": "YYYY-MM-DD", "text": ...}`.
    Jsonl,
    /// A directory of `YYYY-MM-DD_<id>.txt` files.
    Directory,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "directory" | "dir" => Ok(CorpusFormat::Directory),
            other => Err(Error::Dimension(format!("unknown corpus format `{other}`"))),
        }
    }
}

#[derive(Deserialize)]
struct JsonRecord {
    id: Option<String>,
    date: String,
    text: String,
}

fn parse_date(s: &str) -> std::result::Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").map_err(|e| format!("unparseable date `{s}`: {e}"))
}

/// Loads and chronologically sorts a corpus. Documents without an explicit
/// id in JSONL get `line-<n>`.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Vec<Document>> {
    let mut docs = match format {
        CorpusFormat::Jsonl => load_jsonl(path)?,
        CorpusFormat::Directory => load_directory(path)?,
    };
    if docs.is_empty() {
        return Err(Error::EmptyCorpus(path.to_owned()));
    }
    docs.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.id.cmp(&b.id)));
    log::info!("loaded {} documents from {}", docs.len(), path.display());
    Ok(docs)
}

fn load_jsonl(path: &Path) -> Result<Vec<Document>> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut seen = HashSet::new();
    let mut docs = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record_err = |message: String| Error::Record {
            path: path.to_owned(),
            line: line_no,
            message,
        };
        let rec: JsonRecord = serde_json::from_str(line).map_err(|e| record_err(e.to_string()))?;
        let timestamp = parse_date(&rec.date).map_err(record_err)?;
        let id = rec.id.unwrap_or_else(|| format!("line-{line_no}"));
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateId { id, line: line_no });
        }
        docs.push(Document {
            id,
            timestamp,
            body: rec.text,
        });
    }
    Ok(docs)
}

fn load_directory(path: &Path) -> Result<Vec<Document>> {
    let mut entries: Vec<_> = fs::read_dir(path)
        .map_err(|e| Error::io(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "txt"))
        .collect();
    entries.sort();

    let mut seen = HashSet::new();
    let mut docs = Vec::new();
    for (idx, file) in entries.iter().enumerate() {
        let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let record_err = |message: String| Error::Record {
            path: file.clone(),
            line: 0,
            message,
        };
        let (date, id) = stem
            .split_once('_')
            .ok_or_else(|| record_err("file name must be YYYY-MM-DD_<id>.txt".into()))?;
        let timestamp = parse_date(date).map_err(record_err)?;
        if !seen.insert(id.to_owned()) {
            return Err(Error::DuplicateId {
                id: id.to_owned(),
                line: idx + 1,
            });
        }
        let body = fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
        docs.push(Document {
            id: id.to_owned(),
            timestamp,
            body,
        });
    }
    Ok(docs)
}
