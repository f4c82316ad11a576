//! Small dense helpers shared by the estimators.

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{Error, Result};

pub(crate) fn column_means(x: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(x.ncols(), x.column_iter().map(|c| c.mean()))
}

pub(crate) fn center_columns(x: &DMatrix<f64>, means: &DVector<f64>) -> DMatrix<f64> {
    let mut out = x.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col.add_scalar_mut(-means[j]);
    }
    out
}

/// Pearson correlation; 0 when either side is constant.
pub(crate) fn correlation(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let (ma, mb) = (a.mean(), b.mean());
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

pub(crate) fn ensure_finite_matrix(x: &DMatrix<f64>, what: &'static str) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub(crate) fn ensure_finite_vector(x: &DVector<f64>, what: &'static str) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Numerical rank from sorted singular values.
pub(crate) fn numerical_rank(singular_values: &DVector<f64>, rows: usize, cols: usize) -> usize {
    let smax = singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    let tol = rows.max(cols) as f64 * f64::EPSILON * smax;
    singular_values.iter().filter(|&&s| s > tol).count()
}

/// Thin SVD with singular values sorted in decreasing order.
pub(crate) fn thin_svd(x: &DMatrix<f64>, compute_u: bool) -> SVD<f64, nalgebra::Dyn, nalgebra::Dyn> {
    SVD::new(x.clone(), compute_u, true)
}

/// Rows selected by index, in order.
pub fn select_rows(x: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), x.ncols(), |r, c| x[(rows[r], c)])
}

pub fn select_entries(v: &DVector<f64>, rows: &[usize]) -> DVector<f64> {
    DVector::from_iterator(rows.len(), rows.iter().map(|&r| v[r]))
}

/// Contiguous row range `[start, end)`.
pub fn row_range(x: &DMatrix<f64>, start: usize, end: usize) -> DMatrix<f64> {
    x.rows(start, end - start).into_owned()
}

pub fn hstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "cannot stack {} rows beside {} rows",
            a.nrows(),
            b.nrows()
        )));
    }
    Ok(DMatrix::from_fn(a.nrows(), a.ncols() + b.ncols(), |r, c| {
        if c < a.ncols() {
            a[(r, c)]
        } else {
            b[(r, c - a.ncols())]
        }
    }))
}
