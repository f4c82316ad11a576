use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{make_supervised_dataset, SupervisedDataset, Target};
use super::folds::CvPlan;
use super::metrics::{diebold_mariano, nrmse, rmse, DmResult};
use super::model::{default_grid, fit_model, FittedModel, Hyper, ModelSpec};
use super::tune::{tune, GridScore};
use crate::error::{Error, Result};
use crate::lexicon::ConstructIndexSets;
use crate::pathmodel::Decomposition;

/// Share of usable rows assigned to training.
pub const TRAIN_FRACTION: f64 = 0.6;

/// Inputs shared by every model of a forecasting task.
#[derive(Debug, Clone)]
pub struct TaskData {
    /// Labels of every period, aligned with `text` rows and `y`.
    pub periods: Vec<String>,
    pub text: DMatrix<f64>,
    pub constructs: Option<ConstructIndexSets>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastTask {
    pub name: String,
    pub target: Target,
    pub models: Vec<ModelSpec>,
    pub baseline: ModelSpec,
}

impl ForecastTask {
    /// Earliest anchor at which every model of the task has its lags.
    pub fn first_anchor(&self) -> usize {
        self.models.iter().chain([&self.baseline]).map(|m| m.lags).max().unwrap_or(0)
    }
}

/// Optional overrides for tuning.
#[derive(Debug, Clone, Default)]
pub struct BacktestOptions {
    pub plan: Option<CvPlan>,
    pub grid: Option<Vec<Hyper>>,
}

/// Result of tuning, refitting and testing one model on one task.
#[derive(Debug, Clone)]
pub struct ModelRun {
    pub model: ModelSpec,
    pub dataset: SupervisedDataset,
    pub train_rows: usize,
    pub hyper: Hyper,
    pub cv_rmse: f64,
    pub cv_table: Vec<GridScore>,
    pub fitted: FittedModel,
    /// Test rows (indices into `dataset`) with predictions and errors.
    pub test_rows: Vec<usize>,
    pub predictions: Vec<f64>,
    pub errors: Vec<f64>,
}

impl ModelRun {
    pub fn actuals(&self) -> Vec<f64> {
        self.test_rows.iter().map(|&r| self.dataset.y[r]).collect()
    }

    pub fn rmse(&self) -> Result<f64> {
        rmse(&self.errors)
    }

    pub fn test_anchors(&self) -> Vec<usize> {
        self.test_rows.iter().map(|&r| self.dataset.anchors[r]).collect()
    }

    /// Path-model decomposition over the test rows.
    pub fn decomposition(&self) -> Result<Decomposition> {
        self.fitted.decompose(&self.test_design())
    }

    /// Raw design rows of the test window.
    pub fn test_design(&self) -> DMatrix<f64> {
        crate::linalg::select_rows(&self.dataset.x, &self.test_rows)
    }
}

fn max_components(ds: &SupervisedDataset, model: &ModelSpec, n_rows: usize, plan: &CvPlan) -> usize {
    let smallest_train = plan.initial.min(n_rows);
    let cols = match model.source {
        super::model::FeatureSource::Pca | super::model::FeatureSource::Lsa => ds.text_columns,
        _ => ds.x.ncols(),
    };
    cols.min(smallest_train.saturating_sub(1))
}

/// Splits usable rows 60/40, tunes inside the training part, refits on all
/// training rows and predicts the test part.
pub fn run_model(
    data: &TaskData,
    target: Target,
    model: &ModelSpec,
    first_anchor: usize,
    opts: &BacktestOptions,
) -> Result<ModelRun> {
    model.validate()?;
    let features = if model.source.uses_text() {
        data.text.clone()
    } else {
        DMatrix::zeros(data.y.len(), 0)
    };
    if features.nrows() != data.y.len() || data.periods.len() != data.y.len() {
        return Err(Error::Dimension(format!(
            "{} periods, {} text rows, {} indicator values",
            data.periods.len(),
            features.nrows(),
            data.y.len()
        )));
    }
    let ds = make_supervised_dataset(&features, &data.y, target, model.lags)?.starting_at(first_anchor)?;
    let n = ds.len();
    let train_rows = (TRAIN_FRACTION * n as f64).floor() as usize;
    if train_rows == 0 || train_rows == n {
        return Err(Error::TooFewRows { required: 2, got: n });
    }
    let plan = match opts.plan {
        Some(p) => p,
        None => CvPlan::default_for(train_rows)?,
    };
    let grid = match &opts.grid {
        Some(g) => g.clone(),
        None => default_grid(model, max_components(&ds, model, train_rows, &plan)),
    };
    let constructs = data.constructs.as_ref();
    let tuned = tune(&ds, train_rows, model, constructs, &grid, &plan)?;
    let train: Vec<usize> = (0..train_rows).collect();
    let fitted = fit_model(model, &tuned.best, &ds, constructs, &train)?;
    let test_rows: Vec<usize> = (train_rows..n).collect();
    let pred = fitted.predict(&ds, &test_rows)?;
    let predictions: Vec<f64> = pred.iter().copied().collect();
    let errors = test_rows.iter().zip(&predictions).map(|(&r, p)| ds.y[r] - p).collect();
    Ok(ModelRun {
        model: *model,
        dataset: ds,
        train_rows,
        hyper: tuned.best,
        cv_rmse: tuned.best_cv_rmse,
        cv_table: tuned.table,
        fitted,
        test_rows,
        predictions,
        errors,
    })
}

/// Diebold-Mariano comparison on the test periods both runs share.
pub fn compare_runs(run: &ModelRun, baseline: &ModelRun, h: usize) -> Result<DmResult> {
    let base_anchors = baseline.test_anchors();
    let mut e1 = Vec::new();
    let mut e2 = Vec::new();
    for (anchor, e) in run.test_anchors().iter().zip(&run.errors) {
        if let Ok(pos) = base_anchors.binary_search(anchor) {
            e1.push(*e);
            e2.push(baseline.errors[pos]);
        }
    }
    diebold_mariano(&e1, &e2, h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmComparison {
    pub baseline: String,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastReport {
    pub task: String,
    pub target: Target,
    pub model: String,
    pub seed: u64,
    pub train_rows: usize,
    pub test_rows: usize,
    pub hyperparameters: Hyper,
    pub cv_rmse: f64,
    pub rmse: f64,
    pub nrmse: Option<f64>,
    pub dm: DmComparison,
    pub cv_table: Vec<GridScore>,
    pub test_periods: Vec<String>,
    pub actual: Vec<f64>,
    pub predicted: Vec<f64>,
    /// Reference to the stored fitted path model usable for decomposition.
    pub decomposition_ref: Option<String>,
}

impl ForecastReport {
    pub fn build(task: &ForecastTask, run: &ModelRun, baseline: &ModelRun, periods: &[String], seed: u64) -> Result<Self> {
        let rmse = run.rmse()?;
        let actual = run.actuals();
        let nrmse = nrmse(rmse, &actual).ok();
        let dm = match compare_runs(run, baseline, task.target.horizon()) {
            Ok(r) => DmComparison {
                baseline: baseline.model.label(),
                statistic: Some(r.statistic),
                p_value: Some(r.p_value),
                error: None,
            },
            Err(e) => DmComparison {
                baseline: baseline.model.label(),
                statistic: None,
                p_value: None,
                error: Some(e.to_string()),
            },
        };
        Ok(ForecastReport {
            task: task.name.clone(),
            target: task.target,
            model: run.model.label(),
            seed,
            train_rows: run.train_rows,
            test_rows: run.test_rows.len(),
            hyperparameters: run.hyper,
            cv_rmse: run.cv_rmse,
            rmse,
            nrmse,
            dm,
            cv_table: run.cv_table.clone(),
            test_periods: run.test_anchors().iter().map(|&a| periods[a].clone()).collect(),
            actual,
            predicted: run.predictions.clone(),
            decomposition_ref: run
                .model
                .is_path_model()
                .then(|| model_ref(&task.name, &run.model)),
        })
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}

/// Stable identifier `<task>/<model>` for a fitted model.
pub fn model_ref(task: &str, model: &ModelSpec) -> String {
    format!("{task}/{}", model.label())
}

/// Flat metrics table, one row per report.
pub fn write_summary_csv<W: Write>(out: W, reports: &[ForecastReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["task", "target", "model", "rmse", "nrmse", "cv_rmse", "dm_baseline", "dm_statistic", "dm_p_value"])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in reports {
        w.write_record([
            r.task.clone(),
            r.target.to_string(),
            r.model.clone(),
            r.rmse.to_string(),
            opt(r.nrmse),
            r.cv_rmse.to_string(),
            r.dm.baseline.clone(),
            opt(r.dm.statistic),
            opt(r.dm.p_value),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<summary csv>", e))?;
    Ok(())
}

/// Outcome of every model of one task. Failed models are listed with their
/// error instead of aborting the task.
#[derive(Debug)]
pub struct TaskOutcome {
    pub runs: Vec<ModelRun>,
    pub reports: Vec<ForecastReport>,
    pub failures: Vec<(String, String)>,
}

/// Backtests the baseline and every model of `task`. Runs execute in
/// parallel; results keep the task's model order.
pub fn run_task(data: &TaskData, task: &ForecastTask, opts: &BacktestOptions, seed: u64) -> TaskOutcome {
    let first = task.first_anchor();
    let baseline = run_model(data, task.target, &task.baseline, first, opts);
    let results: Vec<Result<ModelRun>> = task
        .models
        .par_iter()
        .map(|m| run_model(data, task.target, m, first, opts))
        .collect();
    let mut outcome = TaskOutcome {
        runs: Vec::new(),
        reports: Vec::new(),
        failures: Vec::new(),
    };
    let baseline = match baseline {
        Ok(b) => b,
        Err(e) => {
            outcome.failures.push((task.baseline.label(), e.to_string()));
            for m in &task.models {
                outcome.failures.push((m.label(), format!("baseline {} failed", task.baseline.label())));
            }
            return outcome;
        }
    };
    for (m, r) in task.models.iter().zip(results) {
        match r.and_then(|run| ForecastReport::build(task, &run, &baseline, &data.periods, seed).map(|rep| (run, rep))) {
            Ok((run, rep)) => {
                outcome.runs.push(run);
                outcome.reports.push(rep);
            }
            Err(e) => outcome.failures.push((m.label(), e.to_string())),
        }
    }
    outcome
}

/// Runs a single model against a baseline and reports it.
pub fn backtest(
    data: &TaskData,
    task: &ForecastTask,
    model: &ModelSpec,
    opts: &BacktestOptions,
    seed: u64,
) -> Result<ForecastReport> {
    let first = task.first_anchor().max(model.lags);
    let run = run_model(data, task.target, model, first, opts)?;
    let base = run_model(data, task.target, &task.baseline, first, opts)?;
    ForecastReport::build(task, &run, &base, &data.periods, seed)
}
