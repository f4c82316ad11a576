//! Model families, hyperparameter grids, and the train-only fitting pipeline.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::dataset::SupervisedDataset;
use crate::error::{Error, Result};
use crate::lexicon::ConstructIndexSets;
use crate::linalg::{hstack, select_entries, select_rows};
use crate::pathmodel::{
    decompose, fit_path_model, fit_semantic_features, predict_path, Block, Decomposition, BlockKind, Downstream, FittedPathModel,
    InnerEstimator, PathModelSpec, SemanticFeatureModel,
};
use crate::reduce::{fit_reducer, fit_standardizer, LinearReducer, ReducerKind, Standardizer};
use crate::regress::{fit_elastic_net, fit_ols, fit_pcr, fit_plsr, LinearModel, PenaltyConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureSource {
    Tfidf,
    Pca,
    Lsa,
    SemanticFeatures,
    PathModel,
    LagsOnly,
}

impl FeatureSource {
    pub fn name(self) -> &'static str {
        match self {
            FeatureSource::Tfidf => "tfidf",
            FeatureSource::Pca => "pca",
            FeatureSource::Lsa => "lsa",
            FeatureSource::SemanticFeatures => "semantic",
            FeatureSource::PathModel => "path",
            FeatureSource::LagsOnly => "ar",
        }
    }

    pub fn uses_text(self) -> bool {
        self != FeatureSource::LagsOnly
    }
}

impl FromStr for FeatureSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "tfidf" => FeatureSource::Tfidf,
            "pca" => FeatureSource::Pca,
            "lsa" => FeatureSource::Lsa,
            "semantic" | "semantic-features" => FeatureSource::SemanticFeatures,
            "path" | "path-model" => FeatureSource::PathModel,
            "ar" | "lags-only" => FeatureSource::LagsOnly,
            other => return Err(Error::InvalidModel(format!("unknown feature source `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Ols,
    Lasso,
    Ridge,
    Enet,
    Pcr,
    Plsr,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Ols => "ols",
            Estimator::Lasso => "lasso",
            Estimator::Ridge => "ridge",
            Estimator::Enet => "enet",
            Estimator::Pcr => "pcr",
            Estimator::Plsr => "plsr",
        }
    }

    fn is_component(self) -> bool {
        matches!(self, Estimator::Pcr | Estimator::Plsr)
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ols" => Estimator::Ols,
            "lasso" => Estimator::Lasso,
            "ridge" => Estimator::Ridge,
            "enet" | "elastic-net" => Estimator::Enet,
            "pcr" => Estimator::Pcr,
            "plsr" | "pls" => Estimator::Plsr,
            other => return Err(Error::InvalidModel(format!("unknown estimator `{other}`"))),
        })
    }
}

/// One model variant: feature source, estimator, and lag order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModelSpec {
    pub source: FeatureSource,
    pub estimator: Estimator,
    /// Appends `Y[i-1], ..., Y[i-lags]` to the predictors.
    pub lags: usize,
}

impl ModelSpec {
    pub fn new(source: FeatureSource, estimator: Estimator, lags: usize) -> Result<Self> {
        let m = ModelSpec {
            source,
            estimator,
            lags,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn ar(lags: usize) -> Self {
        ModelSpec {
            source: FeatureSource::LagsOnly,
            estimator: Estimator::Ols,
            lags,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |why: &str| Err(Error::InvalidModel(format!("{self}: {why}")));
        match (self.source, self.estimator) {
            (FeatureSource::LagsOnly, Estimator::Ols) if self.lags == 0 => {
                bad("an autoregression needs at least one lag")
            }
            (FeatureSource::LagsOnly, e) if e != Estimator::Ols => bad("lag-only models use OLS"),
            (FeatureSource::Pca | FeatureSource::Lsa, e) if e.is_component() => {
                bad("component regressions already reduce the features")
            }
            (FeatureSource::PathModel, e) if e.is_component() => {
                bad("the path model inner estimator is OLS or a penalized regression")
            }
            _ => Ok(()),
        }
    }

    /// Short label such as `path-ols-l6` or `ar6`.
    pub fn label(&self) -> String {
        self.to_string()
    }

    pub fn is_path_model(&self) -> bool {
        self.source == FeatureSource::PathModel
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.source == FeatureSource::LagsOnly {
            return write!(f, "ar{}", self.lags);
        }
        write!(f, "{}-{}", self.source.name(), self.estimator.name())?;
        if self.lags > 0 {
            write!(f, "-l{}", self.lags)?;
        }
        Ok(())
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(l) = s.strip_prefix("ar") {
            if let Ok(l) = l.parse::<usize>() {
                return ModelSpec::new(FeatureSource::LagsOnly, Estimator::Ols, l);
            }
        }
        let (body, lags) = match s.rsplit_once("-l") {
            Some((b, l)) if l.parse::<usize>().is_ok() => (b, l.parse().unwrap()),
            _ => (s, 0),
        };
        let (source, est) = body
            .rsplit_once('-')
            .ok_or_else(|| Error::InvalidModel(format!("cannot parse model `{s}`")))?;
        ModelSpec::new(source.parse()?, est.parse()?, lags)
    }
}

/// One grid point. Unused fields stay at their defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Hyper {
    pub alpha1: f64,
    pub alpha2: f64,
    /// Component count for PCR/PLS-R, or the reducer dimension for PCA/LSA.
    pub components: Option<usize>,
}

impl Hyper {
    pub fn penalty(&self) -> PenaltyConfig {
        PenaltyConfig {
            alpha1: self.alpha1,
            alpha2: self.alpha2,
        }
    }
}

/// `points` values log-spaced over `[lo, hi]`.
pub fn log_space(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..points)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64))
        .collect()
}

pub const DEFAULT_ALPHA_POINTS: usize = 13;
pub const DEFAULT_MIXES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
pub const DEFAULT_COMPONENTS: [usize; 4] = [2, 5, 10, 20];

pub fn default_alphas() -> Vec<f64> {
    log_space(1e-4, 1e2, DEFAULT_ALPHA_POINTS)
}

/// Default grid for a model, with component counts capped at `max_components`.
pub fn default_grid(model: &ModelSpec, max_components: usize) -> Vec<Hyper> {
    let alphas = default_alphas();
    let penalties: Vec<Hyper> = match model.estimator {
        Estimator::Ols | Estimator::Pcr | Estimator::Plsr => vec![Hyper::default()],
        Estimator::Lasso => alphas.iter().map(|&a| Hyper { alpha1: a, ..Hyper::default() }).collect(),
        Estimator::Ridge => alphas.iter().map(|&a| Hyper { alpha2: a, ..Hyper::default() }).collect(),
        Estimator::Enet => DEFAULT_MIXES
            .iter()
            .flat_map(|&m| {
                alphas.iter().map(move |&l| Hyper {
                    alpha1: m * l,
                    alpha2: (1.0 - m) * l,
                    components: None,
                })
            })
            .collect(),
    };
    let needs_k = model.estimator.is_component() || matches!(model.source, FeatureSource::Pca | FeatureSource::Lsa);
    if !needs_k {
        return penalties;
    }
    let mut ks: Vec<usize> = DEFAULT_COMPONENTS.iter().copied().filter(|&k| k <= max_components).collect();
    if ks.is_empty() && max_components >= 1 {
        ks.push(max_components);
    }
    ks.iter()
        .flat_map(|&k| {
            penalties.iter().map(move |h| Hyper {
                components: Some(k),
                ..*h
            })
        })
        .collect()
}

/// Feature preprocessing fitted on training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocess {
    pub text_standardizer: Option<Standardizer>,
    pub reducer: Option<LinearReducer>,
    pub standardizer: Option<Standardizer>,
    pub use_text: bool,
}

impl Preprocess {
    fn transform(&self, ds: &SupervisedDataset, rows: &[usize]) -> Result<DMatrix<f64>> {
        let x = select_rows(&ds.x, rows);
        let lags = x.columns(ds.text_columns, ds.lag_columns).into_owned();
        let mut text = if self.use_text {
            x.columns(0, ds.text_columns).into_owned()
        } else {
            DMatrix::zeros(rows.len(), 0)
        };
        if let Some(s) = &self.text_standardizer {
            text = s.apply(&text)?;
        }
        if let Some(r) = &self.reducer {
            text = r.apply(&text)?;
        }
        let mut z = hstack(&text, &lags)?;
        if let Some(s) = &self.standardizer {
            z = s.apply(&z)?;
        }
        Ok(z)
    }

    fn rows_seen(&self) -> Vec<(String, usize)> {
        let mut v = Vec::new();
        if let Some(s) = &self.text_standardizer {
            v.push(("text-standardizer".into(), s.rows_seen()));
        }
        if let Some(r) = &self.reducer {
            v.push(("reducer".into(), r.rows_seen()));
        }
        if let Some(s) = &self.standardizer {
            v.push(("standardizer".into(), s.rows_seen()));
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FittedModel {
    Linear { preprocess: Preprocess, model: LinearModel },
    Semantic { standardizer: Standardizer, model: SemanticFeatureModel },
    Path { standardizer: Standardizer, model: FittedPathModel },
}

impl FittedModel {
    pub fn predict(&self, ds: &SupervisedDataset, rows: &[usize]) -> Result<DVector<f64>> {
        match self {
            FittedModel::Linear { preprocess, model } => model.predict(&preprocess.transform(ds, rows)?),
            FittedModel::Semantic { standardizer, model } => {
                model.predict(&standardizer.apply(&select_rows(&ds.x, rows))?)
            }
            FittedModel::Path { standardizer, model } => {
                predict_path(model, &standardizer.apply(&select_rows(&ds.x, rows))?)
            }
        }
    }

    /// Path-model decomposition of raw design rows (text columns then lags).
    pub fn decompose(&self, x: &DMatrix<f64>) -> Result<Decomposition> {
        match self {
            FittedModel::Path { standardizer, model } => decompose(model, &standardizer.apply(x)?),
            _ => Err(Error::NotAPathModel),
        }
    }

    /// Rows each fitted component saw, by stage name.
    pub fn rows_seen(&self) -> Vec<(String, usize)> {
        match self {
            FittedModel::Linear { preprocess, model } => {
                let mut v = preprocess.rows_seen();
                v.push(("estimator".into(), model.rows_seen));
                v
            }
            FittedModel::Semantic { standardizer, model } => vec![
                ("standardizer".into(), standardizer.rows_seen()),
                ("outer".into(), model.projection.rows_seen()),
                ("estimator".into(), model.model.rows_seen),
            ],
            FittedModel::Path { standardizer, model } => vec![
                ("standardizer".into(), standardizer.rows_seen()),
                ("path".into(), model.rows_seen()),
            ],
        }
    }
}

fn fit_linear(est: Estimator, hyper: &Hyper, x: &DMatrix<f64>, y: &DVector<f64>) -> Result<LinearModel> {
    let k = || {
        hyper
            .components
            .ok_or_else(|| Error::InvalidModel("component count missing".into()))
    };
    match est {
        Estimator::Ols => fit_ols(x, y),
        Estimator::Lasso | Estimator::Ridge | Estimator::Enet => fit_elastic_net(x, y, hyper.penalty()),
        Estimator::Pcr => fit_pcr(x, y, k()?),
        Estimator::Plsr => fit_plsr(x, y, k()?),
    }
}

/// Path-model blocks for a training slice: lexicon constructs restricted to
/// columns that vary in the slice (constructs left empty are dropped), then
/// one fixed block per lag column.
fn training_blocks(constructs: &ConstructIndexSets, standardizer: &Standardizer, ds: &SupervisedDataset) -> Vec<Block> {
    let constant = standardizer.constant_columns();
    let mut blocks: Vec<Block> = constructs
        .constructs
        .iter()
        .filter_map(|c| {
            let indices: Vec<usize> = c.indices.iter().copied().filter(|&j| !constant[j]).collect();
            (!indices.is_empty()).then(|| Block {
                name: c.name.clone(),
                indices,
                kind: BlockKind::Estimated,
            })
        })
        .collect();
    for l in 0..ds.lag_columns {
        let j = ds.text_columns + l;
        if !constant[j] {
            blocks.push(Block {
                name: format!("lag{}", l + 1),
                indices: vec![j],
                kind: BlockKind::Fixed,
            });
        }
    }
    blocks
}

/// Fits `model` on the given rows of `ds` and nothing else.
pub fn fit_model(
    model: &ModelSpec,
    hyper: &Hyper,
    ds: &SupervisedDataset,
    constructs: Option<&ConstructIndexSets>,
    rows: &[usize],
) -> Result<FittedModel> {
    model.validate()?;
    if ds.lag_columns != model.lags {
        return Err(Error::Dimension(format!(
            "dataset has {} lag columns, model {model} expects {}",
            ds.lag_columns, model.lags
        )));
    }
    let x = select_rows(&ds.x, rows);
    let y = select_entries(&ds.y, rows);
    match model.source {
        FeatureSource::PathModel | FeatureSource::SemanticFeatures => {
            let constructs = constructs
                .ok_or_else(|| Error::InvalidModel(format!("{model} needs a bound lexicon")))?;
            let standardizer = fit_standardizer(&x)?;
            let xs = standardizer.apply(&x)?;
            let blocks = training_blocks(constructs, &standardizer, ds);
            if blocks.is_empty() {
                return Err(Error::NoConstructs(constructs.constructs.len()));
            }
            let inner = match model.estimator {
                Estimator::Ols => InnerEstimator::Ols,
                _ => InnerEstimator::Penalized(hyper.penalty()),
            };
            let spec = PathModelSpec::new(blocks, inner);
            if model.source == FeatureSource::PathModel {
                let fitted = fit_path_model(&xs, &y, &spec)?;
                Ok(FittedModel::Path {
                    standardizer,
                    model: fitted,
                })
            } else {
                let downstream = match model.estimator {
                    Estimator::Ols => Downstream::Ols,
                    Estimator::Lasso | Estimator::Ridge | Estimator::Enet => Downstream::ElasticNet(hyper.penalty()),
                    Estimator::Pcr => Downstream::Pcr {
                        k: hyper.components.unwrap_or(1).min(spec.blocks.len()),
                    },
                    Estimator::Plsr => Downstream::Plsr {
                        k: hyper.components.unwrap_or(1).min(spec.blocks.len()),
                    },
                };
                let fitted = fit_semantic_features(&xs, &y, &spec, downstream)?;
                Ok(FittedModel::Semantic {
                    standardizer,
                    model: fitted,
                })
            }
        }
        source => {
            let text = x.columns(0, ds.text_columns).into_owned();
            let (text_standardizer, reducer) = match source {
                FeatureSource::Pca => {
                    let s = fit_standardizer(&text)?;
                    let k = hyper
                        .components
                        .ok_or_else(|| Error::InvalidModel("component count missing".into()))?;
                    let r = fit_reducer(&s.apply(&text)?, ReducerKind::Pca, k)?;
                    (Some(s), Some(r))
                }
                FeatureSource::Lsa => {
                    let k = hyper
                        .components
                        .ok_or_else(|| Error::InvalidModel("component count missing".into()))?;
                    (None, Some(fit_reducer(&text, ReducerKind::Lsa, k)?))
                }
                _ => (None, None),
            };
            let mut pre = Preprocess {
                text_standardizer,
                reducer,
                standardizer: None,
                use_text: source.uses_text(),
            };
            let z = pre.transform(ds, rows)?;
            let z = if source == FeatureSource::LagsOnly {
                z
            } else {
                let s = fit_standardizer(&z)?;
                let out = s.apply(&z)?;
                pre.standardizer = Some(s);
                out
            };
            let fitted = fit_linear(model.estimator, hyper, &z, &y)?;
            Ok(FittedModel::Linear {
                preprocess: pre,
                model: fitted,
            })
        }
    }
}
