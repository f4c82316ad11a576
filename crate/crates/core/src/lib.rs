//! Forecasting indicator series from timestamped text.
//!
//! The crate covers the whole chain: corpus ingestion and period-level tf-idf
//! matrices ([`textpipe`]), dictionary constructs ([`lexicon`]), unsupervised
//! reduction ([`reduce`]), linear estimators and autoregressive baselines
//! ([`regress`]), the semantic path model with regularized inner estimation
//! ([`pathmodel`]) and rolling-origin evaluation ([`evaluate`]).

pub mod error;
pub mod evaluate;
pub mod lexicon;
pub mod linalg;
pub mod pathmodel;
pub mod reduce;
pub mod regress;
pub mod textpipe;

pub use error::{Error, Result};
