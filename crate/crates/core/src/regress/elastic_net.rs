//! Elastic net by cyclic coordinate descent.
//!
//! Objective, fixed for every penalty grid in the crate:
//!
//! ```text
//! (1 / 2n) ||y - b0 - X b||^2 + alpha1 ||b||_1 + alpha2 ||b||_2^2
//! ```
//!
//! so ridge (`alpha1 = 0`) solves `(X'X + 2 n alpha2 I) b = X'y` on centered
//! data, and every coefficient is exactly zero once
//! `alpha1 >= max_j |x_j'(y - mean(y))| / n`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_xy, fit_ols, LinearModel};
use crate::error::{Error, Result};
use crate::linalg::{center_columns, column_means};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PenaltyConfig {
    /// L1 weight.
    pub alpha1: f64,
    /// L2 weight.
    pub alpha2: f64,
}

impl PenaltyConfig {
    pub fn new(alpha1: f64, alpha2: f64) -> Result<Self> {
        let p = PenaltyConfig { alpha1, alpha2 };
        p.validate()?;
        Ok(p)
    }

    pub fn lasso(alpha1: f64) -> Self {
        PenaltyConfig { alpha1, alpha2: 0.0 }
    }

    pub fn ridge(alpha2: f64) -> Self {
        PenaltyConfig { alpha1: 0.0, alpha2 }
    }

    pub fn is_ols(&self) -> bool {
        self.alpha1 == 0.0 && self.alpha2 == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha1", self.alpha1), ("alpha2", self.alpha2)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidPenalty(format!("{name} = {v}")));
            }
        }
        Ok(())
    }
}

/// Solver controls. Defaults: stop when the largest coefficient change in a
/// sweep drops below `1e-7`, give up after 10,000 sweeps, natural order.
#[derive(Debug, Clone, PartialEq)]
pub struct CdOptions {
    pub tol: f64,
    pub max_sweeps: usize,
    /// Coordinate visiting order; must be a permutation of `0..p`.
    pub order: Option<Vec<usize>>,
}

impl Default for CdOptions {
    fn default() -> Self {
        CdOptions {
            tol: 1e-7,
            max_sweeps: 10_000,
            order: None,
        }
    }
}

#[inline]
pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Elastic net with default solver controls. A zero penalty is plain OLS.
pub fn fit_elastic_net(x: &DMatrix<f64>, y: &DVector<f64>, pen: PenaltyConfig) -> Result<LinearModel> {
    fit_elastic_net_with(x, y, pen, &CdOptions::default())
}

pub fn fit_elastic_net_with(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    pen: PenaltyConfig,
    opts: &CdOptions,
) -> Result<LinearModel> {
    check_xy(x, y)?;
    pen.validate()?;
    if pen.is_ols() {
        return fit_ols(x, y);
    }
    let (n, p) = x.shape();
    let order: Vec<usize> = match &opts.order {
        Some(o) => {
            let mut sorted = o.clone();
            sorted.sort_unstable();
            if sorted != (0..p).collect::<Vec<_>>() {
                return Err(Error::Dimension("coordinate order is not a permutation".into()));
            }
            o.clone()
        }
        None => (0..p).collect(),
    };

    let nf = n as f64;
    let x_mean = column_means(x);
    let xc = center_columns(x, &x_mean);
    let y_mean = y.mean();
    let mut resid = y.add_scalar(-y_mean);
    let col_sq: Vec<f64> = xc.column_iter().map(|c| c.norm_squared() / nf).collect();
    let mut beta: DVector<f64> = DVector::zeros(p);

    let mut converged = p == 0;
    let mut sweeps = 0;
    while !converged && sweeps < opts.max_sweeps {
        sweeps += 1;
        let mut max_change = 0.0f64;
        for &j in &order {
            let denom = col_sq[j] + 2.0 * pen.alpha2;
            if denom == 0.0 {
                continue;
            }
            let xj = xc.column(j);
            let old = beta[j];
            let rho = xj.dot(&resid) / nf + col_sq[j] * old;
            let new = soft_threshold(rho, pen.alpha1) / denom;
            let delta = new - old;
            if delta != 0.0 {
                resid.axpy(-delta, &xj, 1.0);
                beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        converged = max_change < opts.tol;
    }
    if !converged {
        let kkt = kkt_on_centered(&xc, &resid, &beta, pen);
        return Err(Error::NoConvergence {
            sweeps,
            kkt_violation: kkt,
        });
    }
    let intercept = y_mean - x_mean.dot(&beta);
    Ok(LinearModel::new(intercept, beta, n))
}

fn kkt_on_centered(xc: &DMatrix<f64>, resid: &DVector<f64>, beta: &DVector<f64>, pen: PenaltyConfig) -> f64 {
    let nf = xc.nrows() as f64;
    (0..beta.len())
        .map(|j| {
            let grad = -xc.column(j).dot(resid) / nf + 2.0 * pen.alpha2 * beta[j];
            if beta[j] != 0.0 {
                (grad + pen.alpha1 * beta[j].signum()).abs()
            } else {
                (grad.abs() - pen.alpha1).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Largest per-coordinate violation of the elastic-net optimality conditions
/// for a fitted model, recomputed from scratch on `(x, y)`.
pub fn kkt_violation(x: &DMatrix<f64>, y: &DVector<f64>, model: &LinearModel, pen: PenaltyConfig) -> f64 {
    let resid = y - (x * &model.coefficients).add_scalar(model.intercept);
    let x_mean = column_means(x);
    let xc = center_columns(x, &x_mean);
    kkt_on_centered(&xc, &resid, &model.coefficients, pen)
}
