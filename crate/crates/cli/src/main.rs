use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use semforecast_cli::{cmd_backtest, cmd_decompose, cmd_ingest, cmd_synth, exit_code, RunConfig, OUTPUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "semforecast", version, about = "Forecast indicator series from timestamped text")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, default_value = "semforecast.toml")]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Overrides the configured output directory.
    #[arg(long, global = true, env = OUTPUT_DIR_ENV)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and cache the period-term matrix and bound lexicon.
    Ingest,
    /// Run every configured task and write reports.
    Backtest,
    /// Write the construct decomposition of a stored path model.
    Decompose {
        /// `<task>/<model>`, e.g. `ip-h1/path-ols-l6`.
        model_ref: String,
    },
    /// Write a synthetic corpus, lexicon, indicator and config.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        periods: usize,
        /// Random-walk indicator unrelated to the text.
        #[arg(long)]
        null: bool,
    },
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    let load = || RunConfig::load(&cli.config, cli.seed, cli.output_dir.clone());
    match &cli.command {
        Command::Synth { out, periods, null } => {
            let seed = cli
                .seed
                .ok_or_else(|| semforecast_cli::ConfigError("synth requires --seed".into()))?;
            cmd_synth(out, seed, *periods, *null)?;
            println!("wrote synthetic inputs to {}", out.display());
        }
        Command::Ingest => {
            let cfg = load()?;
            let ing = cmd_ingest(&cfg)?;
            if ing.reused {
                println!("up-to-date: cache {} reused", &ing.fingerprint[..12]);
            }
            print!("{}", ing.summary());
        }
        Command::Backtest => {
            let cfg = load()?;
            let summary = cmd_backtest(&cfg)?;
            for r in &summary.reports {
                println!("{:<24} {:<22} rmse {:.6}", r.task, r.model, r.rmse);
            }
            for f in &summary.failures {
                eprintln!("FAILED {} {}: {}", f.task, f.model, f.error);
            }
            println!(
                "{} reports, {} failures, written to {}",
                summary.reports.len(),
                summary.failures.len(),
                summary.output_dir.display()
            );
            if !summary.failures.is_empty() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Decompose { model_ref } => {
            let cfg = load()?;
            let path = cmd_decompose(&cfg, model_ref)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
