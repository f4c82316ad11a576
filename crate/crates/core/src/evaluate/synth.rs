//! Seeded synthetic economy: latent AR(1) sentiment factors emit Poisson term
//! counts per construct block and drive the indicator.
//!
//! ```text
//! f[k,0] ~ N(0, 1)
//! f[k,t] = rho f[k,t-1] + sqrt(1 - rho^2) eta[k,t]                 eta ~ N(0, 1)
//! c[j,t] ~ Poisson(base * exp(g[j] f[k(j),t]))      term j in block k(j)
//! c[j,t] ~ Poisson(base)                            noise term j
//! g[j]   = gamma * u[j]                                             u ~ U(0.5, 1.5)
//! y[0]   = mu / (1 - a)
//! y[t]   = mu + a y[t-1] + sum_k b[k] f[k,t-1] + sigma eps[t]      eps ~ N(0, 1)
//! ```
//!
//! With `random_walk` set, `y[t] = y[t-1] + sigma eps[t]` and the loadings
//! are ignored. Terms are pronounceable letter strings that the tokenizer
//! keeps unchanged, so a generated corpus re-ingests to the same counts.

use std::io::Write;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::SemanticLexicon;
use crate::textpipe::{
    english_stopwords, porter, tfidf_weight, Document, Period, PeriodTermMatrix, Resolution, Vocabulary,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructSpec {
    pub name: String,
    pub terms: usize,
    /// Loading `b[k]` of the construct factor on next period's indicator.
    pub loading: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_periods: usize,
    pub constructs: Vec<ConstructSpec>,
    pub noise_terms: usize,
    /// Factor persistence `rho`.
    pub persistence: f64,
    /// Baseline Poisson rate `base`.
    pub base_rate: f64,
    /// Average term sensitivity `gamma`.
    pub sensitivity: f64,
    pub intercept: f64,
    /// Indicator autoregression `a`.
    pub autoregression: f64,
    pub noise_sd: f64,
    pub random_walk: bool,
    pub start: Period,
}

impl SyntheticSpec {
    /// Two constructs loading `+2` and `-1` on the indicator.
    pub fn signal(n_periods: usize) -> Self {
        SyntheticSpec {
            n_periods,
            constructs: vec![
                ConstructSpec {
                    name: "positive".into(),
                    terms: 25,
                    loading: 2.0,
                },
                ConstructSpec {
                    name: "negative".into(),
                    terms: 25,
                    loading: -1.0,
                },
            ],
            noise_terms: 30,
            persistence: 0.7,
            base_rate: 1.5,
            sensitivity: 0.6,
            intercept: 1.0,
            autoregression: 0.5,
            noise_sd: 0.5,
            random_walk: false,
            start: Period::new(2000, 1, Resolution::Monthly).expect("valid period"),
        }
    }

    /// Same text process, random-walk indicator unrelated to the text.
    pub fn null(n_periods: usize) -> Self {
        let mut s = SyntheticSpec::signal(n_periods);
        for c in &mut s.constructs {
            c.loading = 0.0;
        }
        s.random_walk = true;
        s.noise_sd = 1.0;
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticEconomy {
    pub periods: Vec<Period>,
    /// Sorted term list aligned with `counts` columns.
    pub terms: Vec<String>,
    pub counts: DMatrix<u64>,
    /// `(term, construct)` pairs for every construct term.
    pub lexicon_pairs: Vec<(String, String)>,
    pub indicator: Vec<f64>,
    /// Latent factors, one column per construct.
    pub factors: DMatrix<f64>,
}

/// First `count` pronounceable consonant-vowel strings that survive
/// tokenization unchanged, in lexicographic order.
pub fn synthetic_terms(count: usize) -> Vec<String> {
    const CONS: &[u8] = b"bdfgkmnprtvz";
    const VOWELS: &[u8] = b"aiou";
    let stop = english_stopwords();
    let mut out = Vec::with_capacity(count);
    'outer: for &a in CONS {
        for &b in VOWELS {
            for &c in CONS {
                for &d in VOWELS {
                    for &e in CONS {
                        if out.len() == count {
                            break 'outer;
                        }
                        let w = String::from_utf8(vec![a, b, c, d, e]).expect("ascii");
                        if porter::stem(&w) == w && !stop.contains(&w) {
                            out.push(w);
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn generate_synthetic_economy(seed: u64, spec: &SyntheticSpec) -> Result<SyntheticEconomy> {
    let n = spec.n_periods;
    if n < 2 {
        return Err(Error::TooFewRows { required: 2, got: n });
    }
    if !(spec.persistence.abs() < 1.0) || !(spec.base_rate > 0.0) {
        return Err(Error::InvalidModel("persistence must lie in (-1, 1) and the base rate be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = spec.constructs.len();
    let block_terms: usize = spec.constructs.iter().map(|c| c.terms).sum();
    let n_terms = block_terms + spec.noise_terms;

    let mut factors = DMatrix::zeros(n, m);
    let innov = (1.0 - spec.persistence * spec.persistence).sqrt();
    for k in 0..m {
        factors[(0, k)] = rng.sample::<f64, _>(StandardNormal);
        for t in 1..n {
            factors[(t, k)] = spec.persistence * factors[(t - 1, k)] + innov * rng.sample::<f64, _>(StandardNormal);
        }
    }

    // term j belongs to block owner[j] (None for noise terms)
    let mut owner: Vec<Option<usize>> = Vec::with_capacity(n_terms);
    for (k, c) in spec.constructs.iter().enumerate() {
        owner.extend(std::iter::repeat(Some(k)).take(c.terms));
    }
    owner.extend(std::iter::repeat(None).take(spec.noise_terms));
    let sens: Vec<f64> = (0..n_terms).map(|_| spec.sensitivity * rng.random_range(0.5..1.5)).collect();

    let words = synthetic_terms(n_terms);
    if words.len() < n_terms {
        return Err(Error::InvalidModel(format!("at most {} synthetic terms available", words.len())));
    }
    // scatter block membership over the sorted word list
    let mut order: Vec<usize> = (0..n_terms).collect();
    for i in (1..n_terms).rev() {
        order.swap(i, rng.random_range(0..=i));
    }

    let mut counts = DMatrix::zeros(n, n_terms);
    for t in 0..n {
        for j in 0..n_terms {
            let rate = match owner[j] {
                Some(k) => spec.base_rate * (sens[j] * factors[(t, k)]).exp(),
                None => spec.base_rate,
            };
            let draw: f64 = Poisson::new(rate)
                .map_err(|e| Error::InvalidModel(format!("Poisson rate {rate}: {e}")))?
                .sample(&mut rng);
            counts[(t, order[j])] = draw as u64;
        }
    }

    let mut y = vec![0.0; n];
    y[0] = if spec.random_walk {
        0.0
    } else {
        spec.intercept / (1.0 - spec.autoregression)
    };
    for t in 1..n {
        let eps: f64 = rng.sample(StandardNormal);
        y[t] = if spec.random_walk {
            y[t - 1] + spec.noise_sd * eps
        } else {
            let drive: f64 = (0..m).map(|k| spec.constructs[k].loading * factors[(t - 1, k)]).sum();
            spec.intercept + spec.autoregression * y[t - 1] + drive + spec.noise_sd * eps
        };
    }

    let lexicon_pairs = (0..n_terms)
        .filter_map(|j| owner[j].map(|k| (words[order[j]].clone(), spec.constructs[k].name.clone())))
        .collect();
    let mut periods = Vec::with_capacity(n);
    let mut p = spec.start;
    for _ in 0..n {
        periods.push(p);
        p = p.next();
    }
    Ok(SyntheticEconomy {
        periods,
        terms: words,
        counts,
        lexicon_pairs,
        indicator: y,
        factors,
    })
}

impl SyntheticEconomy {
    pub fn count_matrix(&self) -> Result<PeriodTermMatrix> {
        PeriodTermMatrix::from_counts(
            self.periods.clone(),
            Vocabulary::new(self.terms.iter().cloned()),
            self.counts.clone(),
        )
    }

    pub fn tfidf(&self) -> Result<PeriodTermMatrix> {
        Ok(tfidf_weight(self.count_matrix()?))
    }

    pub fn lexicon(&self) -> Result<SemanticLexicon> {
        SemanticLexicon::from_pairs(self.lexicon_pairs.iter().map(|(t, c)| (t.as_str(), c.as_str())))
    }

    pub fn period_labels(&self) -> Vec<String> {
        self.periods.iter().map(|p| p.to_string()).collect()
    }

    /// Three documents per period (days 5, 15 and 25) that split each
    /// period's tokens round-robin.
    pub fn documents(&self) -> Vec<Document> {
        let mut docs = Vec::new();
        for (t, p) in self.periods.iter().enumerate() {
            let mut bodies = vec![Vec::new(), Vec::new(), Vec::new()];
            let mut slot = 0;
            for (j, term) in self.terms.iter().enumerate() {
                for _ in 0..self.counts[(t, j)] {
                    bodies[slot % 3].push(term.as_str());
                    slot += 1;
                }
            }
            for (d, body) in bodies.into_iter().enumerate() {
                docs.push(Document {
                    id: format!("{p}-{d}"),
                    timestamp: p.first_day() + chrono::Days::new(4 + 10 * d as u64),
                    body: body.join(" "),
                });
            }
        }
        docs
    }

    /// JSONL corpus with `id`, `date` and `text` fields.
    pub fn write_corpus_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for d in self.documents() {
            let line = serde_json::json!({
                "id": d.id,
                "date": d.timestamp.format("%Y-%m-%d").to_string(),
                "text": d.body,
            });
            writeln!(out, "{line}").map_err(|e| Error::io("<corpus>", e))?;
        }
        Ok(())
    }

    pub fn write_lexicon_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["term", "category"])?;
        for (t, c) in &self.lexicon_pairs {
            w.write_record([t, c])?;
        }
        w.flush().map_err(|e| Error::io("<lexicon>", e))?;
        Ok(())
    }

    pub fn write_indicator_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["period", "value"])?;
        for (p, v) in self.periods.iter().zip(&self.indicator) {
            w.write_record([p.to_string(), v.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<indicator>", e))?;
        Ok(())
    }
}
