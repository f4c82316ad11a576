//! Outer-weight estimation shared by the path model and the semantic-feature
//! composite.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Block, BlockKind, PathModelSpec, WeightingScheme};
use crate::error::{Error, Result};
use crate::linalg::{center_columns, column_means, correlation};

/// Sparse term-to-construct projection. Weight vector `i` is aligned with
/// `blocks[i].indices`; no other column ever enters construct `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterProjection {
    pub(crate) blocks: Vec<Block>,
    pub(crate) weights: Vec<DVector<f64>>,
    pub(crate) x_mean: DVector<f64>,
    pub(crate) iterations: usize,
    pub(crate) rows_seen: usize,
}

impl OuterProjection {
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn names(&self) -> Vec<&str> {
        self.blocks.iter().map(|b| b.name.as_str()).collect()
    }

    pub fn n_constructs(&self) -> usize {
        self.blocks.len()
    }

    pub fn n_features(&self) -> usize {
        self.x_mean.len()
    }

    /// Outer weights of construct `i`, aligned with its index set.
    pub fn weights(&self, i: usize) -> &DVector<f64> {
        &self.weights[i]
    }

    /// Training column means subtracted before projection.
    pub fn feature_means(&self) -> &DVector<f64> {
        &self.x_mean
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn rows_seen(&self) -> usize {
        self.rows_seen
    }

    /// Construct scores for new rows.
    pub fn scores(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.n_features() {
            return Err(Error::Dimension(format!(
                "model was fitted on {} feature columns, input has {}",
                self.n_features(),
                x.ncols()
            )));
        }
        let mut z = DMatrix::zeros(x.nrows(), self.blocks.len());
        for (i, (block, phi)) in self.blocks.iter().zip(&self.weights).enumerate() {
            for r in 0..x.nrows() {
                let mut s = 0.0;
                for (w, &j) in phi.iter().zip(&block.indices) {
                    s += w * (x[(r, j)] - self.x_mean[j]);
                }
                z[(r, i)] = s;
            }
        }
        Ok(z)
    }

    pub(crate) fn flip(&mut self, i: usize) {
        self.weights[i].neg_mut();
    }
}

fn block_score(xc: &DMatrix<f64>, idx: &[usize], phi: &DVector<f64>) -> DVector<f64> {
    let mut z = DVector::zeros(xc.nrows());
    for (w, &j) in phi.iter().zip(idx) {
        z.axpy(*w, &xc.column(j), 1.0);
    }
    z
}

fn sample_sd(v: &DVector<f64>) -> f64 {
    let m = v.mean();
    let ss: f64 = v.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (v.len() as f64 - 1.0)).sqrt()
}

/// Rescales `phi` so the block score has unit sample variance, then orients
/// it so the score correlates nonnegatively with the unweighted block sum.
fn normalize_and_orient(xc: &DMatrix<f64>, block: &Block, mut phi: DVector<f64>) -> Result<DVector<f64>> {
    let z = block_score(xc, &block.indices, &phi);
    let sd = sample_sd(&z);
    if !(sd > 1e-12) || !sd.is_finite() {
        return Err(Error::ConstructCollapsed(block.name.clone()));
    }
    phi /= sd;
    let sum = block_score(xc, &block.indices, &DVector::from_element(block.indices.len(), 1.0));
    if correlation(&(z / sd), &sum) < 0.0 {
        phi.neg_mut();
    }
    Ok(phi)
}

/// Runs the outer iteration and returns the projection with its training scores.
pub(crate) fn fit_outer(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    spec: &PathModelSpec,
) -> Result<(OuterProjection, DMatrix<f64>)> {
    spec.validate(x.ncols())?;
    if x.nrows() != y.len() {
        return Err(Error::Dimension(format!(
            "{} rows in X but {} responses",
            x.nrows(),
            y.len()
        )));
    }
    if x.nrows() < 3 {
        return Err(Error::TooFewRows {
            required: 3,
            got: x.nrows(),
        });
    }
    crate::linalg::ensure_finite_matrix(x, "feature matrix")?;
    crate::linalg::ensure_finite_vector(y, "response")?;
    let y_sd = sample_sd(y);
    if !(y_sd > 1e-12 * (1.0 + y.mean().abs())) {
        return Err(Error::ZeroVarianceResponse);
    }
    let n = x.nrows();
    let x_mean = column_means(x);
    let xc = center_columns(x, &x_mean);
    let y_std = y.add_scalar(-y.mean()) / y_sd;

    let mut weights = spec
        .blocks
        .iter()
        .map(|b| normalize_and_orient(&xc, b, DVector::from_element(b.indices.len(), 1.0)))
        .collect::<Result<Vec<_>>>()?;

    let estimated: Vec<usize> = (0..spec.blocks.len())
        .filter(|&i| spec.blocks[i].kind == BlockKind::Estimated)
        .collect();
    let mut iterations = 0;
    let mut last_delta = 0.0;
    let mut converged = estimated.is_empty();
    while !converged {
        if iterations == spec.max_iterations {
            return Err(Error::OuterNoConvergence {
                iterations,
                last_delta,
            });
        }
        iterations += 1;
        let mut max_change = 0.0f64;
        let mut max_old = 0.0f64;
        for &i in &estimated {
            let block = &spec.blocks[i];
            let z = block_score(&xc, &block.indices, &weights[i]);
            let r = correlation(&z, &y_std);
            let e = match spec.scheme {
                WeightingScheme::Centroid => {
                    if r < 0.0 {
                        -1.0
                    } else {
                        1.0
                    }
                }
                WeightingScheme::Factorial => r,
            };
            let inner = &y_std * e;
            let raw = DVector::from_iterator(
                block.indices.len(),
                block
                    .indices
                    .iter()
                    .map(|&j| xc.column(j).dot(&inner) / (n as f64 - 1.0)),
            );
            let new = normalize_and_orient(&xc, block, raw)?;
            max_change = max_change.max((&new - &weights[i]).amax());
            max_old = max_old.max(weights[i].amax());
            weights[i] = new;
        }
        last_delta = max_change / max_old;
        converged = last_delta < spec.tolerance;
    }

    let projection = OuterProjection {
        blocks: spec.blocks.clone(),
        weights,
        x_mean,
        iterations,
        rows_seen: n,
    };
    let scores = projection.scores(x)?;
    Ok((projection, scores))
}
