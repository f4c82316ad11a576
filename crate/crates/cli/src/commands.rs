use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use semforecast::evaluate::{
    generate_synthetic_economy, run_task, write_summary_csv, BacktestOptions, FittedModel, ForecastReport,
    SyntheticSpec, Target, TaskData,
};
use semforecast::lexicon::{bind, load_lexicon, ConstructIndexSets};
use semforecast::textpipe::{
    build_period_counts, english_stopwords, load_corpus, load_stopwords, tfidf_weight, Period, PeriodTermMatrix,
};

use crate::config::{ConfigError, RunConfig};

const CACHE_VERSION: &str = "semforecast-cache-1";

/// Cached ingestion products.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub matrix: PeriodTermMatrix,
    pub constructs: ConstructIndexSets,
    pub fingerprint: String,
    pub reused: bool,
}

impl Ingested {
    pub fn summary(&self) -> String {
        let periods = self.matrix.periods();
        let mut s = format!(
            "{} periods ({} to {}), {} terms\n",
            periods.len(),
            periods[0],
            periods[periods.len() - 1],
            self.matrix.vocabulary().len()
        );
        for c in &self.constructs.constructs {
            s += &format!("  construct {}: {} terms, coverage {:.3}\n", c.name, c.indices.len(), c.coverage);
        }
        for d in &self.constructs.dropped {
            s += &format!("  construct {d}: dropped (no term in vocabulary)\n");
        }
        s
    }
}

fn hash_file(h: &mut Sha256, path: &Path) -> anyhow::Result<()> {
    let mut buf = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .with_context(|| format!("reading {}", path.display()))?;
    h.update((buf.len() as u64).to_le_bytes());
    h.update(&buf);
    Ok(())
}

fn fingerprint(cfg: &RunConfig) -> anyhow::Result<String> {
    let mut h = Sha256::new();
    h.update(CACHE_VERSION);
    h.update(cfg.resolution.name());
    h.update(cfg.min_period_fraction.to_le_bytes());
    if cfg.corpus_path.is_dir() {
        let mut entries: Vec<PathBuf> = fs::read_dir(&cfg.corpus_path)
            .with_context(|| format!("listing {}", cfg.corpus_path.display()))?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()?;
        entries.sort();
        for p in entries.iter().filter(|p| p.is_file()) {
            h.update(p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default());
            hash_file(&mut h, p)?;
        }
    } else {
        hash_file(&mut h, &cfg.corpus_path)?;
    }
    hash_file(&mut h, &cfg.lexicon)?;
    match &cfg.stopwords {
        Some(p) => hash_file(&mut h, p)?,
        None => h.update("builtin-stopwords"),
    }
    Ok(hex::encode(h.finalize()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(serde_json::from_reader(std::io::BufReader::new(f))?)
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

/// Builds (or reuses) the period-term matrix and bound lexicon under
/// `<output>/cache`.
pub fn cmd_ingest(cfg: &RunConfig) -> anyhow::Result<Ingested> {
    let cache = cfg.output_dir.join("cache");
    let fp = fingerprint(cfg)?;
    let fp_path = cache.join("fingerprint");
    let matrix_path = cache.join("matrix.json");
    let constructs_path = cache.join("constructs.json");
    if fs::read_to_string(&fp_path).ok().as_deref() == Some(fp.as_str()) && matrix_path.exists() && constructs_path.exists()
    {
        return Ok(Ingested {
            matrix: read_json(&matrix_path)?,
            constructs: read_json(&constructs_path)?,
            fingerprint: fp,
            reused: true,
        });
    }
    let stopwords = match &cfg.stopwords {
        Some(p) => load_stopwords(p)?,
        None => english_stopwords(),
    };
    let docs = load_corpus(&cfg.corpus_path, cfg.corpus_format)?;
    let counts = build_period_counts(&docs, cfg.resolution, cfg.min_period_fraction, &stopwords)?;
    let matrix = tfidf_weight(counts);
    let lexicon = load_lexicon(&cfg.lexicon)?;
    let constructs = bind(&lexicon, matrix.vocabulary())?;
    write_json(&matrix_path, &matrix)?;
    write_json(&constructs_path, &constructs)?;
    matrix.write_csv(create(&cache.join("tfidf.csv"))?)?;
    fs::write(&fp_path, &fp).with_context(|| format!("writing {}", fp_path.display()))?;
    Ok(Ingested {
        matrix,
        constructs,
        fingerprint: fp,
        reused: false,
    })
}

/// Reads a `period,value` CSV and aligns it with `periods`. Every period must
/// be present; values outside the calendar are ignored.
pub fn load_indicator(path: &Path, periods: &[Period]) -> anyhow::Result<Vec<f64>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| ConfigError(format!("indicator {}: {e}", path.display())))?;
    let headers = rdr.headers()?.clone();
    let norm: Vec<String> = headers.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    if norm != ["period", "value"] {
        return Err(ConfigError(format!("indicator {}: expected header `period,value`", path.display())).into());
    }
    let mut values = HashMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let period: Period = rec[0]
            .parse()
            .map_err(|e| ConfigError(format!("{}:{line}: {e}", path.display())))?;
        let value: f64 = rec[1]
            .trim()
            .parse()
            .map_err(|e| ConfigError(format!("{}:{line}: value: {e}", path.display())))?;
        if values.insert(period, value).is_some() {
            return Err(ConfigError(format!("{}:{line}: duplicate period {period}", path.display())).into());
        }
    }
    periods
        .iter()
        .map(|p| {
            values
                .get(p)
                .copied()
                .ok_or_else(|| anyhow!("indicator {} has no value for {p}", path.display()))
        })
        .collect()
}

/// Stored fitted model with the test-window design rows, for decomposition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub task: String,
    pub model: String,
    pub target: Target,
    pub test_periods: Vec<String>,
    pub test_design: DMatrix<f64>,
    pub fitted: FittedModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub task: String,
    pub model: String,
    pub error: String,
}

#[derive(Debug)]
pub struct BacktestSummary {
    pub reports: Vec<ForecastReport>,
    pub failures: Vec<Failure>,
    pub output_dir: PathBuf,
}

/// Family of a model label: the label without its lag suffix, `ar` for
/// autoregressions.
fn family(label: &str) -> String {
    if label.starts_with("ar") && label[2..].chars().all(|c| c.is_ascii_digit()) {
        return "ar".into();
    }
    match label.rsplit_once("-l") {
        Some((body, l)) if l.parse::<usize>().is_ok() => body.into(),
        _ => label.into(),
    }
}

/// Best RMSE per (indicator, family) across targets.
fn write_best_of_breed(path: &Path, cfg: &RunConfig, reports: &[ForecastReport]) -> anyhow::Result<()> {
    let mut targets: Vec<String> = Vec::new();
    let mut best: BTreeMap<(String, String), BTreeMap<String, (f64, String)>> = BTreeMap::new();
    let indicator_of: HashMap<&str, &str> = cfg
        .tasks
        .iter()
        .map(|t| (t.task.name.as_str(), t.indicator.as_str()))
        .collect();
    for t in &cfg.tasks {
        let label = t.task.target.to_string();
        if !targets.contains(&label) {
            targets.push(label);
        }
    }
    for r in reports {
        let ind = indicator_of.get(r.task.as_str()).copied().unwrap_or("");
        let cell = best
            .entry((ind.to_string(), family(&r.model)))
            .or_default()
            .entry(r.target.to_string())
            .or_insert((f64::INFINITY, String::new()));
        if r.rmse < cell.0 {
            *cell = (r.rmse, r.model.clone());
        }
    }
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header = vec!["indicator".to_string(), "family".to_string()];
    for t in &targets {
        header.push(format!("{t}_rmse"));
        header.push(format!("{t}_model"));
    }
    w.write_record(&header)?;
    for ((ind, fam), cells) in &best {
        let mut rec = vec![ind.clone(), fam.clone()];
        for t in &targets {
            match cells.get(t) {
                Some((v, m)) => {
                    rec.push(v.to_string());
                    rec.push(m.clone());
                }
                None => {
                    rec.push(String::new());
                    rec.push(String::new());
                }
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs every configured task and writes reports, fitted models, the summary
/// tables and the failure manifest under the output directory.
pub fn cmd_backtest(cfg: &RunConfig) -> anyhow::Result<BacktestSummary> {
    let ingested = cmd_ingest(cfg)?;
    let periods = ingested.matrix.periods().to_vec();
    let labels: Vec<String> = periods.iter().map(|p| p.to_string()).collect();
    let text = ingested
        .matrix
        .tfidf()
        .cloned()
        .ok_or_else(|| anyhow!("cached matrix lacks tf-idf weights"))?;
    let mut indicator_values: BTreeMap<&str, anyhow::Result<Vec<f64>>> = BTreeMap::new();
    for (name, path) in &cfg.indicators {
        indicator_values.insert(name, load_indicator(path, &periods));
    }
    // configuration-level indicator problems abort the run
    for v in indicator_values.values() {
        if let Err(e) = v {
            if e.downcast_ref::<ConfigError>().is_some() {
                return Err(anyhow!("{e}").context(ConfigError(e.to_string())));
            }
        }
    }
    let opts = BacktestOptions {
        plan: cfg.cv,
        grid: None,
    };

    let outcomes: Vec<_> = cfg
        .tasks
        .par_iter()
        .map(|tc| match &indicator_values[tc.indicator.as_str()] {
            Ok(y) => {
                let data = TaskData {
                    periods: labels.clone(),
                    text: text.clone(),
                    constructs: Some(ingested.constructs.clone()),
                    y: y.clone(),
                };
                Ok(run_task(&data, &tc.task, &opts, cfg.seed))
            }
            Err(e) => Err(e.to_string()),
        })
        .collect();

    let out = &cfg.output_dir;
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (tc, outcome) in cfg.tasks.iter().zip(outcomes) {
        let task = &tc.task;
        match outcome {
            Ok(o) => {
                for (run, report) in o.runs.iter().zip(&o.reports) {
                    let label = run.model.label();
                    write_json(&out.join("reports").join(&task.name).join(format!("{label}.json")), report)?;
                    let artifact = ModelArtifact {
                        task: task.name.clone(),
                        model: label.clone(),
                        target: task.target,
                        test_periods: report.test_periods.clone(),
                        test_design: run.test_design(),
                        fitted: run.fitted.clone(),
                    };
                    write_json(&out.join("models").join(&task.name).join(format!("{label}.json")), &artifact)?;
                }
                reports.extend(o.reports);
                failures.extend(o.failures.into_iter().map(|(model, error)| Failure {
                    task: task.name.clone(),
                    model,
                    error,
                }));
            }
            Err(error) => failures.extend(task.models.iter().map(|m| Failure {
                task: task.name.clone(),
                model: m.label(),
                error: error.clone(),
            })),
        }
    }
    write_summary_csv(create(&out.join("summary.csv"))?, &reports)?;
    write_best_of_breed(&out.join("best_of_breed.csv"), cfg, &reports)?;
    write_json(
        &out.join("run.json"),
        &serde_json::json!({
            "seed": cfg.seed,
            "fingerprint": ingested.fingerprint,
            "tasks": cfg.tasks.iter().map(|t| &t.task).collect::<Vec<_>>(),
        }),
    )?;
    write_json(&out.join("failures.json"), &failures)?;
    Ok(BacktestSummary {
        reports,
        failures,
        output_dir: out.clone(),
    })
}

/// Writes the decomposition CSV of a stored path model; `model_ref` is
/// `<task>/<model>`.
pub fn cmd_decompose(cfg: &RunConfig, model_ref: &str) -> anyhow::Result<PathBuf> {
    let (task, model) = model_ref
        .split_once('/')
        .ok_or_else(|| ConfigError(format!("model reference `{model_ref}` is not `<task>/<model>`")))?;
    let path = cfg.output_dir.join("models").join(task).join(format!("{model}.json"));
    if !path.exists() {
        return Err(ConfigError(format!(
            "no stored model `{model_ref}` at {} (run backtest first)",
            path.display()
        ))
        .into());
    }
    let artifact: ModelArtifact = read_json(&path)?;
    let decomposition = artifact.fitted.decompose(&artifact.test_design)?;
    let err = decomposition.max_identity_error();
    if err >= 1e-10 {
        return Err(anyhow!("decomposition identity violated (relative error {err:e})"));
    }
    let out = cfg.output_dir.join("decompositions").join(task).join(format!("{model}.csv"));
    let mut w = create(&out)?;
    decomposition.write_csv(&mut w, &artifact.test_periods)?;
    w.flush()?;
    Ok(out)
}

/// Writes a synthetic corpus, lexicon, indicator and matching config into `dir`.
pub fn cmd_synth(dir: &Path, seed: u64, periods: usize, null: bool) -> anyhow::Result<()> {
    let spec = if null {
        SyntheticSpec::null(periods)
    } else {
        SyntheticSpec::signal(periods)
    };
    let economy = generate_synthetic_economy(seed, &spec)?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut w = create(&dir.join("corpus.jsonl"))?;
    economy.write_corpus_jsonl(&mut w)?;
    w.flush()?;
    economy.write_lexicon_csv(create(&dir.join("lexicon.csv"))?)?;
    economy.write_indicator_csv(create(&dir.join("indicator.csv"))?)?;
    let config = format!(
        r#"seed = {seed}
output_dir = "output"
resolution = "monthly"
lexicon = "lexicon.csv"

[corpus]
path = "corpus.jsonl"
format = "jsonl"

[[indicator]]
name = "synthetic"
path = "indicator.csv"

[[task]]
indicator = "synthetic"
horizons = [1]
lags = [1, 6]
models = ["ar", "path-ols"]
baseline = "ar1"
"#
    );
    fs::write(dir.join("config.toml"), config).with_context(|| format!("writing {}", dir.display()))?;
    Ok(())
}

/// Exit status for an error: 2 for configuration and input problems, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() || cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<semforecast::Error>() {
            use semforecast::Error as E;
            if matches!(
                e,
                E::Io { .. }
                    | E::Record { .. }
                    | E::EmptyCorpus(_)
                    | E::DuplicateId { .. }
                    | E::InvalidPeriod(_)
                    | E::Lexicon { .. }
                    | E::Csv(_)
                    | E::Serde(_)
            ) {
                return 2;
            }
        }
    }
    1
}
