use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{fit_ols, LinearModel};
use crate::error::{Error, Result};

/// Direct `h`-step autoregression
/// `Y[i+h] = a + b1 Y[i-1] + ... + bl Y[i-l]`.
///
/// The most recent predictor is `Y[i-1]`; `Y[i]` itself is not used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArModel {
    pub lags: usize,
    pub horizon: usize,
    pub model: LinearModel,
}

/// Lag design for anchor periods `i` in `[l, n - h)`: row `r` holds
/// `(Y[i-1], ..., Y[i-l])` and the target `Y[i+h]`. Returns the anchors too.
pub fn lag_design(y: &[f64], lags: usize, horizon: usize) -> (DMatrix<f64>, DVector<f64>, Vec<usize>) {
    let anchors: Vec<usize> = (lags..y.len().saturating_sub(horizon)).collect();
    let x = DMatrix::from_fn(anchors.len(), lags, |r, c| y[anchors[r] - 1 - c]);
    let target = DVector::from_iterator(anchors.len(), anchors.iter().map(|&i| y[i + horizon]));
    (x, target, anchors)
}

pub fn fit_ar(y: &[f64], lags: usize, horizon: usize) -> Result<ArModel> {
    if lags == 0 {
        return Err(Error::Dimension("AR model needs at least one lag".into()));
    }
    let required = lags + horizon + 2;
    if y.len() <= required {
        return Err(Error::SeriesTooShort {
            required,
            got: y.len(),
        });
    }
    let (x, target, _) = lag_design(y, lags, horizon);
    Ok(ArModel {
        lags,
        horizon,
        model: fit_ols(&x, &target)?,
    })
}

impl ArModel {
    /// Prediction of `Y[i+h]` for anchor `i` of `y` (needs `i >= lags`).
    pub fn predict_at(&self, y: &[f64], i: usize) -> Result<f64> {
        if i < self.lags || i > y.len() {
            return Err(Error::Dimension(format!(
                "anchor {i} needs {} earlier observations",
                self.lags
            )));
        }
        let row = DMatrix::from_fn(1, self.lags, |_, c| y[i - 1 - c]);
        Ok(self.model.predict(&row)?[0])
    }

    /// Forecast of the value `h` periods after the end of `history`, taking
    /// the anchor one past the last observation so that `Y[i-1]` is the
    /// latest value.
    pub fn forecast(&self, history: &[f64]) -> Result<f64> {
        self.predict_at(history, history.len())
    }
}
