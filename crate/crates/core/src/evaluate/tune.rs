use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::SupervisedDataset;
use super::folds::{time_slice_folds, CvPlan};
use super::metrics::rmse;
use super::model::{fit_model, Hyper, ModelSpec};
use crate::error::{Error, Result};
use crate::lexicon::ConstructIndexSets;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridScore {
    pub hyper: Hyper,
    /// Mean validation RMSE over folds; absent when any fold failed.
    pub cv_rmse: Option<f64>,
    pub fold_rmse: Vec<f64>,
    pub error: Option<String>,
}

/// Rows seen by each fitted stage in one fold, for leakage audits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub grid_index: usize,
    pub fold: usize,
    pub train_rows: usize,
    pub max_train_row: usize,
    pub min_validation_row: usize,
    pub rows_seen: Vec<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best: Hyper,
    pub best_cv_rmse: f64,
    pub table: Vec<GridScore>,
    #[serde(skip)]
    pub fit_log: Vec<FitRecord>,
}

/// Orders grid points by CV-RMSE, treating scores within a relative `1e-12`
/// as tied and then preferring larger `alpha1`, larger `alpha2`, fewer
/// components.
pub fn compare_grid_points(a: (&Hyper, f64), b: (&Hyper, f64)) -> Ordering {
    let (ha, ra) = a;
    let (hb, rb) = b;
    let scale = ra.abs().max(rb.abs());
    if (ra - rb).abs() > 1e-12 * scale {
        return ra.total_cmp(&rb);
    }
    hb.alpha1
        .total_cmp(&ha.alpha1)
        .then(hb.alpha2.total_cmp(&ha.alpha2))
        .then(ha.components.cmp(&hb.components))
}

/// Grid search over rows `0..n_rows` of `ds` with rolling-origin folds.
pub fn tune(
    ds: &SupervisedDataset,
    n_rows: usize,
    model: &ModelSpec,
    constructs: Option<&ConstructIndexSets>,
    grid: &[Hyper],
    plan: &CvPlan,
) -> Result<TuneResult> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let folds = time_slice_folds(n_rows, plan)?;
    let evaluated: Vec<(GridScore, Vec<FitRecord>)> = grid
        .par_iter()
        .enumerate()
        .map(|(g, hyper)| {
            let mut fold_rmse = Vec::with_capacity(folds.len());
            let mut log = Vec::with_capacity(folds.len());
            for (k, fold) in folds.iter().enumerate() {
                let train: Vec<usize> = fold.train.clone().collect();
                let val: Vec<usize> = fold.validation.clone().collect();
                let outcome = fit_model(model, hyper, ds, constructs, &train).and_then(|fitted| {
                    log.push(FitRecord {
                        grid_index: g,
                        fold: k,
                        train_rows: train.len(),
                        max_train_row: fold.train.end - 1,
                        min_validation_row: fold.validation.start,
                        rows_seen: fitted.rows_seen(),
                    });
                    let pred = fitted.predict(ds, &val)?;
                    let errors: Vec<f64> = val.iter().zip(pred.iter()).map(|(&r, p)| ds.y[r] - p).collect();
                    rmse(&errors)
                });
                match outcome {
                    Ok(r) if r.is_finite() => fold_rmse.push(r),
                    Ok(r) => {
                        return (failed(hyper, fold_rmse, format!("fold {k}: non-finite RMSE {r}")), log)
                    }
                    Err(e) => return (failed(hyper, fold_rmse, format!("fold {k}: {e}")), log),
                }
            }
            let mean = fold_rmse.iter().sum::<f64>() / fold_rmse.len() as f64;
            (
                GridScore {
                    hyper: *hyper,
                    cv_rmse: Some(mean),
                    fold_rmse,
                    error: None,
                },
                log,
            )
        })
        .collect();

    let (table, logs): (Vec<GridScore>, Vec<Vec<FitRecord>>) = evaluated.into_iter().unzip();
    let best = table
        .iter()
        .filter_map(|s| s.cv_rmse.map(|r| (&s.hyper, r)))
        .min_by(|a, b| compare_grid_points(*a, *b));
    match best {
        Some((hyper, score)) => Ok(TuneResult {
            best: *hyper,
            best_cv_rmse: score,
            fit_log: logs.into_iter().flatten().collect(),
            table,
        }),
        None => {
            let mut causes: Vec<String> = table.iter().filter_map(|s| s.error.clone()).collect();
            causes.dedup();
            Err(Error::AllGridPointsFailed(causes.join("; ")))
        }
    }
}

fn failed(hyper: &Hyper, fold_rmse: Vec<f64>, why: String) -> GridScore {
    GridScore {
        hyper: *hyper,
        cv_rmse: None,
        fold_rmse,
        error: Some(why),
    }
}
