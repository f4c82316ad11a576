use std::collections::HashSet;
use std::fs;
use std::path::Path;

use super::porter;
use crate::error::{Error, Result};

/// Minimum token length kept after lowercasing.
pub const MIN_TOKEN_LEN: usize = 2;

const ENGLISH_STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "did", "do", "does", "doing", "down", "during", "each", "few", "for", "from",
    "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself", "him",
    "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just", "me",
    "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once", "only",
    "or", "other", "our", "ours", "ourselves", "out", "over", "own", "same", "she", "should", "so",
    "some", "such", "than", "that", "the", "their", "theirs", "them", "themselves", "then",
    "there", "these", "they", "this", "those", "through", "to", "too", "under", "until", "up",
    "very", "was", "we", "were", "what", "when", "where", "which", "while", "who", "whom", "why",
    "will", "with", "you", "your", "yours", "yourself", "yourselves",
];

/// The built-in English stopword list.
pub fn english_stopwords() -> HashSet<String> {
    ENGLISH_STOPWORDS.iter().map(|s| s.to_string()).collect()
}

/// Reads a stopword file: one term per line, blank lines and `#` comments ignored.
pub fn load_stopwords(path: &Path) -> Result<HashSet<String>> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(content
        .lines()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.to_lowercase())
        .collect())
}

/// Bag-of-words tokenization: lowercase, split on anything non-alphabetic,
/// drop short tokens and stopwords, then Porter-stem.
pub fn tokenize(body: &str, stopwords: &HashSet<String>) -> Vec<String> {
    body.split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .filter(|t| t.chars().count() >= MIN_TOKEN_LEN && !stopwords.contains(t))
        .map(|t| porter::stem(&t))
        .collect()
}

/// Normalizes a single dictionary entry with the corpus pipeline (no stopword
/// filter). Returns `None` when the entry does not reduce to exactly one token.
pub fn normalize_term(raw: &str) -> Option<String> {
    let mut tokens = tokenize(raw, &HashSet::new());
    if tokens.len() == 1 {
        tokens.pop()
    } else {
        None
    }
}
