//! Semantic path model: supervised projection of dictionary term blocks onto
//! unit-variance construct scores, followed by an OLS or penalized inner
//! regression of the response on those scores.
//!
//! Outer weights use Mode A updates against the standardized response with a
//! centroid (default) or factorial inner scheme. Every score is rescaled to
//! unit variance on each iteration and oriented so that it correlates
//! nonnegatively with the plain sum of its block's columns.

mod decompose;
mod outer;

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::ConstructIndexSets;
use crate::regress::{
    fit_elastic_net_with, fit_ols, fit_pcr, fit_plsr, CdOptions, LinearModel, PenaltyConfig,
};

pub use decompose::{decompose, Decomposition};
pub use outer::OuterProjection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    /// Outer weights re-estimated on every iteration.
    Estimated,
    /// Unit weights rescaled once to unit score variance; used for lag columns.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    /// Sorted feature columns belonging to this construct.
    pub indices: Vec<usize>,
    pub kind: BlockKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightingScheme {
    #[default]
    Centroid,
    Factorial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum InnerEstimator {
    Ols,
    Penalized(PenaltyConfig),
}

impl fmt::Display for InnerEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InnerEstimator::Ols => write!(f, "ols"),
            InnerEstimator::Penalized(p) => write!(f, "enet(alpha1={}, alpha2={})", p.alpha1, p.alpha2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathModelSpec {
    pub blocks: Vec<Block>,
    pub inner: InnerEstimator,
    pub scheme: WeightingScheme,
    /// Bound on the largest weight change relative to the largest weight.
    pub tolerance: f64,
    pub max_iterations: usize,
}

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_MAX_ITERATIONS: usize = 300;

impl PathModelSpec {
    pub fn new(blocks: Vec<Block>, inner: InnerEstimator) -> Self {
        PathModelSpec {
            blocks,
            inner,
            scheme: WeightingScheme::Centroid,
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }

    /// One estimated block per bound lexicon construct, column indices
    /// offset by `offset`.
    pub fn from_constructs(sets: &ConstructIndexSets, offset: usize, inner: InnerEstimator) -> Self {
        let blocks = sets
            .constructs
            .iter()
            .map(|c| Block {
                name: c.name.clone(),
                indices: c.indices.iter().map(|&j| j + offset).collect(),
                kind: BlockKind::Estimated,
            })
            .collect();
        PathModelSpec::new(blocks, inner)
    }

    /// Appends a fixed single-column block.
    pub fn with_fixed(mut self, name: impl Into<String>, column: usize) -> Self {
        self.blocks.push(Block {
            name: name.into(),
            indices: vec![column],
            kind: BlockKind::Fixed,
        });
        self
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::PathSpec("at least one construct is required".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::PathSpec(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if let InnerEstimator::Penalized(p) = &self.inner {
            p.validate()?;
        }
        let mut names = BTreeSet::new();
        for b in &self.blocks {
            if !names.insert(b.name.as_str()) {
                return Err(Error::PathSpec(format!("duplicate construct `{}`", b.name)));
            }
            if b.indices.is_empty() {
                return Err(Error::PathSpec(format!("construct `{}` has no columns", b.name)));
            }
            if !b.indices.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::PathSpec(format!(
                    "construct `{}` indices must be strictly increasing",
                    b.name
                )));
            }
            if let Some(&j) = b.indices.iter().find(|&&j| j >= n_features) {
                return Err(Error::PathSpec(format!(
                    "construct `{}` references column {j} of {n_features}",
                    b.name
                )));
            }
        }
        Ok(())
    }
}

/// A fitted path model: outer projection plus inner coefficients
/// `psi_0 + sum_i psi_i z_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPathModel {
    pub projection: OuterProjection,
    /// Training construct scores, one unit-variance column per construct.
    pub training_scores: DMatrix<f64>,
    pub intercept: f64,
    pub path_coefficients: DVector<f64>,
    pub y_mean: f64,
    pub y_sd: f64,
    pub inner: InnerEstimator,
    pub scheme: WeightingScheme,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub converged: bool,
}

impl FittedPathModel {
    pub fn names(&self) -> Vec<&str> {
        self.projection.names()
    }

    pub fn iterations(&self) -> usize {
        self.projection.iterations()
    }

    pub fn rows_seen(&self) -> usize {
        self.projection.rows_seen()
    }

    /// Negates construct `i`'s outer weights and path coefficient together.
    pub fn flip_sign(&mut self, i: usize) {
        self.projection.flip(i);
        self.path_coefficients[i] = -self.path_coefficients[i];
        let mut col = self.training_scores.column_mut(i);
        col.neg_mut();
    }
}

fn fit_inner(z: &DMatrix<f64>, y: &DVector<f64>, inner: &InnerEstimator) -> Result<LinearModel> {
    match inner {
        InnerEstimator::Ols => fit_ols(z, y),
        InnerEstimator::Penalized(p) => fit_elastic_net_with(z, y, *p, &CdOptions::default()),
    }
}

/// Fits outer weights by the iterative Mode A procedure and the inner model
/// on the resulting scores. `x` is expected to be standardized by the caller;
/// it is centered again internally.
pub fn fit_path_model(x: &DMatrix<f64>, y: &DVector<f64>, spec: &PathModelSpec) -> Result<FittedPathModel> {
    let (projection, scores) = outer::fit_outer(x, y, spec)?;
    let inner = fit_inner(&scores, y, &spec.inner)?;
    let y_mean = y.mean();
    let y_sd = (y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / (y.len() as f64 - 1.0)).sqrt();
    Ok(FittedPathModel {
        projection,
        training_scores: scores,
        intercept: inner.intercept,
        path_coefficients: inner.coefficients,
        y_mean,
        y_sd,
        inner: spec.inner,
        scheme: spec.scheme,
        tolerance: spec.tolerance,
        max_iterations: spec.max_iterations,
        converged: true,
    })
}

/// Predictions `psi_0 + sum_i psi_i z_i`, summed in construct order.
pub fn predict_path(model: &FittedPathModel, x: &DMatrix<f64>) -> Result<DVector<f64>> {
    Ok(decompose(model, x)?.prediction)
}

/// Estimator fitted on construct scores in place of the inner regression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Downstream {
    Ols,
    ElasticNet(PenaltyConfig),
    Pcr { k: usize },
    Plsr { k: usize },
}

/// Construct scores from the path-model outer iteration feeding a separate
/// regression estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticFeatureModel {
    pub projection: OuterProjection,
    pub downstream: Downstream,
    pub model: LinearModel,
}

impl SemanticFeatureModel {
    pub fn predict(&self, x: &DMatrix<f64>) -> Result<DVector<f64>> {
        self.model.predict(&self.projection.scores(x)?)
    }
}

pub fn fit_semantic_features(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    spec: &PathModelSpec,
    downstream: Downstream,
) -> Result<SemanticFeatureModel> {
    let (projection, scores) = outer::fit_outer(x, y, spec)?;
    let model = match downstream {
        Downstream::Ols => fit_ols(&scores, y)?,
        Downstream::ElasticNet(p) => fit_elastic_net_with(&scores, y, p, &CdOptions::default())?,
        Downstream::Pcr { k } => fit_pcr(&scores, y, k)?,
        Downstream::Plsr { k } => fit_plsr(&scores, y, k)?,
    };
    Ok(SemanticFeatureModel {
        projection,
        downstream,
        model,
    })
}
