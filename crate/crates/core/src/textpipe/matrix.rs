use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::Document;
use super::period::{Period, Resolution};
use super::tokenize::tokenize;
use crate::error::{Error, Result};

/// Default share of periods a term must occur in to enter the vocabulary.
pub const DEFAULT_MIN_PERIOD_FRACTION: f64 = 0.05;

/// Ordered, deduplicated term axis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds from terms in the given order; later duplicates are ignored.
    pub fn new(terms: impl IntoIterator<Item = String>) -> Self {
        let mut out = Vec::new();
        let mut index = HashMap::new();
        for t in terms {
            if !index.contains_key(&t) {
                index.insert(t.clone(), out.len());
                out.push(t);
            }
        }
        Vocabulary { terms: out, index }
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn position(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }
}

impl From<Vec<String>> for Vocabulary {
    fn from(terms: Vec<String>) -> Self {
        Vocabulary::new(terms)
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.terms
    }
}

/// Rows are consecutive calendar periods, columns are vocabulary terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodTermMatrix {
    periods: Vec<Period>,
    vocabulary: Vocabulary,
    raw_counts: DMatrix<u64>,
    tfidf: Option<DMatrix<f64>>,
}

impl PeriodTermMatrix {
    /// Assembles a count matrix directly, e.g. from a simulator. Periods must be
    /// consecutive.
    pub fn from_counts(
        periods: Vec<Period>,
        vocabulary: Vocabulary,
        raw_counts: DMatrix<u64>,
    ) -> Result<Self> {
        if raw_counts.nrows() != periods.len() || raw_counts.ncols() != vocabulary.len() {
            return Err(Error::Dimension(format!(
                "counts are {}x{}, expected {}x{}",
                raw_counts.nrows(),
                raw_counts.ncols(),
                periods.len(),
                vocabulary.len()
            )));
        }
        if periods.windows(2).any(|w| w[0].steps_to(&w[1]) != 1) {
            return Err(Error::Dimension("periods must be consecutive".into()));
        }
        Ok(PeriodTermMatrix {
            periods,
            vocabulary,
            raw_counts,
            tfidf: None,
        })
    }

    pub fn periods(&self) -> &[Period] {
        &self.periods
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn raw_counts(&self) -> &DMatrix<u64> {
        &self.raw_counts
    }

    /// tf-idf weights, present once [`tfidf_weight`] has run.
    pub fn tfidf(&self) -> Option<&DMatrix<f64>> {
        self.tfidf.as_ref()
    }

    pub fn n_periods(&self) -> usize {
        self.periods.len()
    }

    /// Number of periods in which each term occurs.
    pub fn document_frequency(&self) -> Vec<usize> {
        self.raw_counts
            .column_iter()
            .map(|c| c.iter().filter(|&&v| v > 0).count())
            .collect()
    }

    /// CSV with header `period,<term1>,...`; tf-idf values when available,
    /// raw counts otherwise.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["period".to_string()];
        header.extend(self.vocabulary.terms().iter().cloned());
        w.write_record(&header)?;
        for (r, p) in self.periods.iter().enumerate() {
            let mut rec = vec![p.to_string()];
            match &self.tfidf {
                Some(m) => rec.extend(m.row(r).iter().map(|v| v.to_string())),
                None => rec.extend(self.raw_counts.row(r).iter().map(|v| v.to_string())),
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Sums token counts of all documents per period, fills calendar gaps with
/// zero rows and keeps terms occurring in at least `min_period_fraction` of
/// the periods. Vocabulary is sorted lexicographically.
pub fn build_period_counts(
    docs: &[Document],
    resolution: Resolution,
    min_period_fraction: f64,
    stopwords: &HashSet<String>,
) -> Result<PeriodTermMatrix> {
    if docs.is_empty() {
        return Err(Error::Empty("documents"));
    }
    let first = docs.iter().map(|d| d.timestamp).min().expect("nonempty");
    let last = docs.iter().map(|d| d.timestamp).max().expect("nonempty");
    let periods = Period::span(
        Period::containing(first, resolution),
        Period::containing(last, resolution),
    );
    if periods.len() < 2 {
        return Err(Error::SinglePeriod(resolution.name()));
    }
    let origin = periods[0];

    let tokenized: Vec<(usize, Vec<String>)> = docs
        .par_iter()
        .map(|d| {
            let row = origin.steps_to(&Period::containing(d.timestamp, resolution)) as usize;
            (row, tokenize(&d.body, stopwords))
        })
        .collect();

    let mut per_term: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    for (row, tokens) in tokenized {
        for t in tokens {
            per_term.entry(t).or_insert_with(|| vec![0; periods.len()])[row] += 1;
        }
    }

    let n = periods.len() as f64;
    let kept: Vec<(String, Vec<u64>)> = per_term
        .into_iter()
        .filter(|(_, col)| {
            let df = col.iter().filter(|&&c| c > 0).count();
            df > 0 && df as f64 >= min_period_fraction * n
        })
        .collect();
    if kept.is_empty() {
        return Err(Error::Empty("vocabulary after frequency pruning"));
    }

    let counts = DMatrix::from_fn(periods.len(), kept.len(), |r, c| kept[c].1[r]);
    let vocabulary = Vocabulary::new(kept.into_iter().map(|(t, _)| t));
    Ok(PeriodTermMatrix {
        periods,
        vocabulary,
        raw_counts: counts,
        tfidf: None,
    })
}

/// `weight(p, t) = count(p, t) * ln(N / df(t))` over periods, no smoothing.
pub fn tfidf_weight(mut counts: PeriodTermMatrix) -> PeriodTermMatrix {
    let n = counts.n_periods() as f64;
    let idf: Vec<f64> = counts
        .document_frequency()
        .into_iter()
        .map(|df| if df == 0 { 0.0 } else { (n / df as f64).ln() })
        .collect();
    let raw = &counts.raw_counts;
    counts.tfidf = Some(DMatrix::from_fn(raw.nrows(), raw.ncols(), |r, c| {
        raw[(r, c)] as f64 * idf[c]
    }));
    counts
}
