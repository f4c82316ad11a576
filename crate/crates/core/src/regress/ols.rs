use nalgebra::{DMatrix, DVector};

use super::{check_xy, LinearModel};
use crate::error::{Error, Result};
use crate::linalg::{center_columns, column_means, numerical_rank, thin_svd};

/// Ordinary least squares with intercept, solved through the SVD of the
/// centered design.
///
/// A constant response yields `intercept = mean(y)` and zero slopes without a
/// rank check; any other response requires `rows > cols` and full column rank.
pub fn fit_ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<LinearModel> {
    check_xy(x, y)?;
    let (n, p) = x.shape();
    let y_mean = y.mean();
    let yc = y.add_scalar(-y_mean);
    if yc.amax() <= 1e-14 * (1.0 + y_mean.abs()) {
        return Ok(LinearModel::new(y_mean, DVector::zeros(p), n));
    }
    if n <= p {
        return Err(Error::TooFewRows {
            required: p + 1,
            got: n,
        });
    }
    if p == 0 {
        return Ok(LinearModel::new(y_mean, DVector::zeros(0), n));
    }
    let x_mean = column_means(x);
    let xc = center_columns(x, &x_mean);
    let svd = thin_svd(&xc, true);
    let rank = numerical_rank(&svd.singular_values, n, p);
    if rank < p {
        return Err(Error::RankDeficient { rank, cols: p });
    }
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v requested");
    let mut uty = u.transpose() * &yc;
    for (i, s) in svd.singular_values.iter().enumerate() {
        uty[i] /= s;
    }
    let beta = v_t.transpose() * uty;
    let intercept = y_mean - x_mean.dot(&beta);
    Ok(LinearModel::new(intercept, beta, n))
}
