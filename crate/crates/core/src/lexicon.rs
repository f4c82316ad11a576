//! Semantic lexicon: named constructs over (stemmed) terms, and their binding
//! to the column indices of a [`Vocabulary`].
//!
//! Membership is non-exclusive; a term listed under several categories is
//! indexed in each of them.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textpipe::{normalize_term, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticLexicon {
    membership: BTreeMap<String, BTreeSet<String>>,
}

impl SemanticLexicon {
    /// Builds from `(term, category)` pairs, normalizing every term with the
    /// corpus pipeline. Entries that do not reduce to a single token are
    /// skipped.
    pub fn from_pairs<I, T, C>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (T, C)>,
        T: AsRef<str>,
        C: AsRef<str>,
    {
        let mut membership: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (term, category) in pairs {
            let category = category.as_ref().trim();
            if category.is_empty() {
                continue;
            }
            let set = membership.entry(category.to_owned()).or_default();
            match normalize_term(term.as_ref()) {
                Some(t) => {
                    set.insert(t);
                }
                None => log::warn!("lexicon entry `{}` skipped", term.as_ref()),
            }
        }
        if membership.is_empty() {
            return Err(Error::Lexicon {
                path: Default::default(),
                message: "no entries".into(),
            });
        }
        if let Some((name, _)) = membership.iter().find(|(_, terms)| terms.is_empty()) {
            return Err(Error::Lexicon {
                path: Default::default(),
                message: format!("category `{name}` has no terms after normalization"),
            });
        }
        Ok(SemanticLexicon { membership })
    }

    /// Construct names in sorted order.
    pub fn constructs(&self) -> impl Iterator<Item = &str> {
        self.membership.keys().map(|s| s.as_str())
    }

    pub fn terms(&self, construct: &str) -> Option<&BTreeSet<String>> {
        self.membership.get(construct)
    }

    pub fn len(&self) -> usize {
        self.membership.len()
    }

    pub fn is_empty(&self) -> bool {
        self.membership.is_empty()
    }
}

/// Loads a `term,category` CSV (header required).
pub fn load_lexicon(path: &Path) -> Result<SemanticLexicon> {
    let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(content.as_bytes());
    let headers = reader.headers()?.clone();
    let cols: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
    if cols != ["term", "category"] {
        return Err(Error::Lexicon {
            path: path.to_owned(),
            message: format!("expected header `term,category`, found `{}`", cols.join(",")),
        });
    }
    let mut pairs = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Record {
            path: path.to_owned(),
            line: i + 2,
            message: e.to_string(),
        })?;
        pairs.push((rec[0].to_owned(), rec[1].to_owned()));
    }
    SemanticLexicon::from_pairs(pairs).map_err(|e| match e {
        Error::Lexicon { message, .. } => Error::Lexicon {
            path: path.to_owned(),
            message,
        },
        other => other,
    })
}

/// One construct's column indices within a vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundConstruct {
    pub name: String,
    /// Sorted, unique vocabulary columns.
    pub indices: Vec<usize>,
    /// Share of the construct's lexicon terms found in the vocabulary.
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructIndexSets {
    pub constructs: Vec<BoundConstruct>,
    /// Constructs with no term in the vocabulary.
    pub dropped: Vec<String>,
}

impl ConstructIndexSets {
    pub fn names(&self) -> Vec<&str> {
        self.constructs.iter().map(|c| c.name.as_str()).collect()
    }
}

/// Resolves each construct's terms against the vocabulary. Constructs with an
/// empty intersection are dropped with a warning.
pub fn bind(lexicon: &SemanticLexicon, vocab: &Vocabulary) -> Result<ConstructIndexSets> {
    if vocab.is_empty() {
        return Err(Error::Empty("vocabulary"));
    }
    let mut constructs = Vec::new();
    let mut dropped = Vec::new();
    for (name, terms) in &lexicon.membership {
        let mut indices: Vec<usize> = terms.iter().filter_map(|t| vocab.position(t)).collect();
        indices.sort_unstable();
        if indices.is_empty() {
            log::warn!("construct `{name}` has no term in the vocabulary; dropped");
            dropped.push(name.clone());
            continue;
        }
        let coverage = indices.len() as f64 / terms.len() as f64;
        constructs.push(BoundConstruct {
            name: name.clone(),
            indices,
            coverage,
        });
    }
    if constructs.is_empty() {
        return Err(Error::NoConstructs(dropped.len()));
    }
    Ok(ConstructIndexSets {
        constructs,
        dropped,
    })
}
