//! Library side of the `semforecast` command: configuration loading and the
//! ingest, backtest, decompose and synth commands.

pub mod commands;
pub mod config;

pub use commands::{
    cmd_backtest, cmd_decompose, cmd_ingest, cmd_synth, exit_code, BacktestSummary, Failure, Ingested, ModelArtifact,
};
pub use config::{ConfigError, RunConfig, TaskConfig};

/// Environment variable overriding the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "SEMFORECAST_OUTPUT_DIR";
