//! Standardization and unsupervised dimension reduction.
//!
//! PCA works on standardized (hence centered) input; LSA is the truncated SVD
//! of the raw tf-idf matrix. In both cases the loadings are right singular
//! vectors and `scores = X * loadings`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{column_means, ensure_finite_matrix, numerical_rank, thin_svd};

/// Per-column location and scale learned from a training slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    mean: DVector<f64>,
    sd: DVector<f64>,
    constant: Vec<bool>,
    rows_seen: usize,
}

impl Standardizer {
    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn sd(&self) -> &DVector<f64> {
        &self.sd
    }

    /// Columns with zero variance on the fit data; they map to 0.
    pub fn constant_columns(&self) -> &[bool] {
        &self.constant
    }

    /// Number of rows the statistics were computed from.
    pub fn rows_seen(&self) -> usize {
        self.rows_seen
    }

    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    /// Maps `x` with the stored statistics.
    pub fn apply(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.mean.len() {
            return Err(Error::Dimension(format!(
                "standardizer fitted on {} columns, got {}",
                self.mean.len(),
                x.ncols()
            )));
        }
        let mut out = x.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            if self.constant[j] {
                col.fill(0.0);
            } else {
                let (m, s) = (self.mean[j], self.sd[j]);
                col.apply(|v| *v = (*v - m) / s);
            }
        }
        Ok(out)
    }
}

/// Learns column means and sample standard deviations (`n - 1`).
pub fn fit_standardizer(x: &DMatrix<f64>) -> Result<Standardizer> {
    if x.nrows() < 2 {
        return Err(Error::TooFewRows {
            required: 2,
            got: x.nrows(),
        });
    }
    ensure_finite_matrix(x, "standardizer input")?;
    let n = x.nrows() as f64;
    let mean = column_means(x);
    let sd = DVector::from_iterator(
        x.ncols(),
        x.column_iter().enumerate().map(|(j, c)| {
            let m = mean[j];
            (c.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0)).sqrt()
        }),
    );
    let constant = mean
        .iter()
        .zip(sd.iter())
        .map(|(m, s)| *s <= 1e-12 * (1.0 + m.abs()))
        .collect();
    Ok(Standardizer {
        mean,
        sd,
        constant,
        rows_seen: x.nrows(),
    })
}

pub fn apply_standardizer(s: &Standardizer, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    s.apply(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReducerKind {
    Pca,
    Lsa,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearReducer {
    kind: ReducerKind,
    /// `n_features x k`, orthonormal columns.
    loadings: DMatrix<f64>,
    /// Share of total variance per component (PCA only).
    explained_variance: Option<Vec<f64>>,
    rows_seen: usize,
}

impl LinearReducer {
    pub fn kind(&self) -> ReducerKind {
        self.kind
    }

    pub fn loadings(&self) -> &DMatrix<f64> {
        &self.loadings
    }

    pub fn k(&self) -> usize {
        self.loadings.ncols()
    }

    pub fn explained_variance(&self) -> Option<&[f64]> {
        self.explained_variance.as_deref()
    }

    pub fn rows_seen(&self) -> usize {
        self.rows_seen
    }

    pub fn apply(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.loadings.nrows() {
            return Err(Error::Dimension(format!(
                "reducer fitted on {} columns, got {}",
                self.loadings.nrows(),
                x.ncols()
            )));
        }
        Ok(x * &self.loadings)
    }

    /// Writes loadings as CSV: `feature,c1,...,ck`.
    pub fn write_loadings_csv<W: Write>(&self, out: W, feature_names: &[String]) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["feature".to_string()];
        header.extend((1..=self.k()).map(|i| format!("c{i}")));
        w.write_record(&header)?;
        for r in 0..self.loadings.nrows() {
            let name = feature_names.get(r).cloned().unwrap_or_else(|| r.to_string());
            let mut rec = vec![name];
            rec.extend(self.loadings.row(r).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Principal axes of `x` (no centering applied here): the leading `k` right
/// singular vectors with the largest-magnitude entry of each made positive,
/// plus all squared singular values.
pub(crate) fn principal_axes(x: &DMatrix<f64>, k: usize) -> Result<(DMatrix<f64>, Vec<f64>)> {
    if k == 0 {
        return Err(Error::RankExceeded {
            requested: 0,
            max: 0,
        });
    }
    ensure_finite_matrix(x, "reducer input")?;
    let svd = thin_svd(x, false);
    let rank = numerical_rank(&svd.singular_values, x.nrows(), x.ncols());
    if k > rank {
        return Err(Error::RankExceeded { requested: k, max: rank });
    }
    let v_t = svd.v_t.as_ref().expect("v requested");
    let mut loadings = v_t.rows(0, k).transpose();
    for mut col in loadings.column_iter_mut() {
        let pivot = col
            .iter()
            .cloned()
            .fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
        if pivot < 0.0 {
            col.neg_mut();
        }
    }
    let sq = svd.singular_values.iter().map(|s| s * s).collect();
    Ok((loadings, sq))
}

/// Fits `k` components. PCA expects standardized input; LSA expects raw tf-idf.
pub fn fit_reducer(x: &DMatrix<f64>, kind: ReducerKind, k: usize) -> Result<LinearReducer> {
    let (loadings, sq) = principal_axes(x, k)?;
    let explained_variance = match kind {
        ReducerKind::Pca => {
            let total: f64 = sq.iter().sum();
            Some(sq.iter().take(k).map(|s| s / total).collect())
        }
        ReducerKind::Lsa => None,
    };
    Ok(LinearReducer {
        kind,
        loadings,
        explained_variance,
        rows_seen: x.nrows(),
    })
}

pub fn apply_reducer(r: &LinearReducer, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    r.apply(x)
}
