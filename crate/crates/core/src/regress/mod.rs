//! Supervised linear predictors: OLS, elastic net (covering LASSO and ridge)
//! by coordinate descent, principal component regression, PLS regression via
//! NIPALS, and the direct autoregressive baseline.

mod ar;
mod components;
mod elastic_net;
mod ols;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reduce::Standardizer;

pub use ar::{fit_ar, lag_design, ArModel};
pub use components::{fit_pcr, fit_plsr};
pub use elastic_net::{
    fit_elastic_net, fit_elastic_net_with, kkt_violation, soft_threshold, CdOptions, PenaltyConfig,
};
pub use ols::fit_ols;

/// Affine predictor `intercept + x . coefficients`, optionally preceded by a
/// stored standardizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: DVector<f64>,
    pub standardizer: Option<Standardizer>,
    /// Rows the estimator saw at fit time.
    pub rows_seen: usize,
}

impl LinearModel {
    pub(crate) fn new(intercept: f64, coefficients: DVector<f64>, rows_seen: usize) -> Self {
        LinearModel {
            intercept,
            coefficients,
            standardizer: None,
            rows_seen,
        }
    }

    pub fn with_standardizer(mut self, s: Standardizer) -> Self {
        self.standardizer = Some(s);
        self
    }

    pub fn n_features(&self) -> usize {
        self.coefficients.len()
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<DVector<f64>> {
        if x.ncols() != self.coefficients.len() {
            return Err(Error::Dimension(format!(
                "model has {} coefficients, input has {} columns",
                self.coefficients.len(),
                x.ncols()
            )));
        }
        let z;
        let x = match &self.standardizer {
            Some(s) => {
                z = s.apply(x)?;
                &z
            }
            None => x,
        };
        Ok((x * &self.coefficients).add_scalar(self.intercept))
    }
}

pub(crate) fn check_xy(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::Dimension(format!(
            "{} rows in X but {} responses",
            x.nrows(),
            y.len()
        )));
    }
    if x.nrows() == 0 {
        return Err(Error::Empty("design matrix"));
    }
    crate::linalg::ensure_finite_matrix(x, "design matrix")?;
    crate::linalg::ensure_finite_vector(y, "response")
}
