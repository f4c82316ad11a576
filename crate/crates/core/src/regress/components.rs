use nalgebra::{DMatrix, DVector};

use super::{check_xy, LinearModel};
use crate::error::{Error, Result};
use crate::linalg::{center_columns, column_means, numerical_rank, thin_svd};
use crate::reduce::principal_axes;

/// Principal component regression: OLS on the first `k` principal scores of
/// the centered design, folded back to coefficients on the original columns.
pub fn fit_pcr(x: &DMatrix<f64>, y: &DVector<f64>, k: usize) -> Result<LinearModel> {
    check_xy(x, y)?;
    let x_mean = column_means(x);
    let xc = center_columns(x, &x_mean);
    let (axes, _) = principal_axes(&xc, k)?;
    let scores = &xc * &axes;
    let y_mean = y.mean();
    let yc = y.add_scalar(-y_mean);
    // principal scores are mutually orthogonal
    let gamma = DVector::from_iterator(
        k,
        scores.column_iter().map(|t| t.dot(&yc) / t.norm_squared()),
    );
    let beta = axes * gamma;
    let intercept = y_mean - x_mean.dot(&beta);
    Ok(LinearModel::new(intercept, beta, x.nrows()))
}

/// PLS1 regression by NIPALS with `k` deflation steps.
///
/// Stops early when the deflated response is fully explained, which leaves
/// the solution unchanged.
pub fn fit_plsr(x: &DMatrix<f64>, y: &DVector<f64>, k: usize) -> Result<LinearModel> {
    check_xy(x, y)?;
    let (n, p) = x.shape();
    let y_mean = y.mean();
    let mut f = y.add_scalar(-y_mean);
    if f.amax() <= 1e-14 * (1.0 + y_mean.abs()) {
        return Err(Error::ZeroVarianceResponse);
    }
    let x_mean = column_means(x);
    let mut e = center_columns(x, &x_mean);
    let rank = numerical_rank(&thin_svd(&e, false).singular_values, n, p);
    if k == 0 || k > rank {
        return Err(Error::RankExceeded { requested: k, max: rank });
    }

    let mut weights: Vec<DVector<f64>> = Vec::with_capacity(k);
    let mut loadings: Vec<DVector<f64>> = Vec::with_capacity(k);
    let mut y_loadings: Vec<f64> = Vec::with_capacity(k);
    let mut first_norm = None;
    for _ in 0..k {
        let mut w = e.transpose() * &f;
        let norm = w.norm();
        let first = *first_norm.get_or_insert(norm);
        if norm <= 1e-12 * first {
            break;
        }
        w /= norm;
        let t = &e * &w;
        let tt = t.norm_squared();
        let p_vec = e.transpose() * &t / tt;
        let q = f.dot(&t) / tt;
        e -= &t * p_vec.transpose();
        f.axpy(-q, &t, 1.0);
        weights.push(w);
        loadings.push(p_vec);
        y_loadings.push(q);
    }

    let a = weights.len();
    let w_mat = DMatrix::from_columns(&weights);
    let p_mat = DMatrix::from_columns(&loadings);
    let q = DVector::from_vec(y_loadings);
    let ptw = p_mat.transpose() * &w_mat;
    let inner = ptw
        .lu()
        .solve(&q)
        .ok_or(Error::RankExceeded { requested: a, max: rank })?;
    let beta = w_mat * inner;
    let intercept = y_mean - x_mean.dot(&beta);
    Ok(LinearModel::new(intercept, beta, n))
}
