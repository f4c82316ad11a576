//! Corpus ingestion, tokenization and period-level tf-idf term matrices.
//!
//! Documents are tokenized independently (in parallel), then their raw token
//! counts are summed per calendar period. The tf-idf weighting treats each
//! period as one "document": `N` is the number of periods and `df(t)` the
//! number of periods in which `t` occurs.

mod corpus;
mod matrix;
mod period;
pub mod porter;
mod tokenize;

pub use corpus::{load_corpus, CorpusFormat, Document};
pub use matrix::{
    build_period_counts, tfidf_weight, PeriodTermMatrix, Vocabulary, DEFAULT_MIN_PERIOD_FRACTION,
};
pub use period::{Period, Resolution};
pub use tokenize::{english_stopwords, load_stopwords, normalize_term, tokenize, MIN_TOKEN_LEN};
