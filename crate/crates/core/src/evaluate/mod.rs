//! Supervised datasets, rolling-origin cross-validation, grid tuning,
//! 60/40 backtests, accuracy metrics and the synthetic economy used to test
//! the whole chain.

mod backtest;
mod dataset;
mod folds;
mod metrics;
mod model;
pub mod synth;
mod tune;

pub use backtest::{
    backtest, compare_runs, model_ref, run_model, run_task, write_summary_csv, BacktestOptions, DmComparison,
    ForecastReport, ForecastTask, ModelRun, TaskData, TaskOutcome, TRAIN_FRACTION,
};
pub use dataset::{make_supervised_dataset, SupervisedDataset, Target};
pub use folds::{time_slice_folds, CvPlan, Fold, DEFAULT_FOLDS};
pub use metrics::{diebold_mariano, nrmse, rmse, DmResult, DM_MIN_LENGTH};
pub use model::{
    default_alphas, default_grid, fit_model, log_space, Estimator, FeatureSource, FittedModel, Hyper, ModelSpec,
    Preprocess, DEFAULT_ALPHA_POINTS, DEFAULT_COMPONENTS, DEFAULT_MIXES,
};
pub use synth::{generate_synthetic_economy, ConstructSpec, SyntheticEconomy, SyntheticSpec};
pub use tune::{compare_grid_points, tune, FitRecord, GridScore, TuneResult};
