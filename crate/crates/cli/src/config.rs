//! Run configuration: one TOML file describing inputs, tasks and outputs.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use semforecast::evaluate::{CvPlan, ForecastTask, ModelSpec, Target};
use semforecast::textpipe::{CorpusFormat, Resolution, DEFAULT_MIN_PERIOD_FRACTION};

/// Problems with the configuration or its referenced files.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
    #[serde(default = "default_resolution")]
    resolution: String,
    min_period_fraction: Option<f64>,
    corpus: RawCorpus,
    lexicon: PathBuf,
    stopwords: Option<PathBuf>,
    #[serde(default)]
    indicator: Vec<RawIndicator>,
    cv: Option<RawCv>,
    #[serde(default)]
    task: Vec<RawTask>,
}

fn default_resolution() -> String {
    "monthly".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCorpus {
    path: PathBuf,
    #[serde(default = "default_format")]
    format: String,
}

fn default_format() -> String {
    "jsonl".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIndicator {
    name: String,
    path: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCv {
    folds: usize,
    initial: usize,
    validation: usize,
    #[serde(default = "yes")]
    expanding: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    indicator: String,
    #[serde(default)]
    horizons: Vec<usize>,
    #[serde(default)]
    delta: bool,
    #[serde(default = "default_lags")]
    lags: Vec<usize>,
    models: Vec<String>,
    baseline: Option<String>,
}

fn default_lags() -> Vec<usize> {
    vec![0]
}

/// A configured forecasting task bound to an indicator.
#[derive(Debug, Clone)]
pub struct TaskConfig {
    pub indicator: String,
    pub task: ForecastTask,
}

/// Validated run configuration with paths resolved against the config file.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub resolution: Resolution,
    pub min_period_fraction: f64,
    pub corpus_path: PathBuf,
    pub corpus_format: CorpusFormat,
    pub lexicon: PathBuf,
    pub stopwords: Option<PathBuf>,
    pub indicators: Vec<(String, PathBuf)>,
    pub cv: Option<CvPlan>,
    pub tasks: Vec<TaskConfig>,
}

/// Expands family names across lag orders. Entries carrying an explicit lag
/// (`ar6`, `path-ols-l6`) are kept as written.
fn expand_models(entries: &[String], lags: &[usize]) -> anyhow::Result<Vec<ModelSpec>> {
    let mut out: Vec<ModelSpec> = Vec::new();
    let mut push = |m: ModelSpec| {
        if !out.contains(&m) {
            out.push(m);
        }
    };
    for e in entries {
        let explicit = e.strip_prefix("ar").is_some_and(|l| l.parse::<usize>().is_ok())
            || e.rsplit_once("-l").is_some_and(|(_, l)| l.parse::<usize>().is_ok());
        if explicit {
            push(e.parse().map_err(|err| config_err(format!("model `{e}`: {err}")))?);
        } else if e == "ar" {
            for &l in lags.iter().filter(|&&l| l > 0) {
                push(ModelSpec::ar(l));
            }
        } else {
            for &l in lags {
                let label = if l == 0 { e.clone() } else { format!("{e}-l{l}") };
                push(label.parse().map_err(|err| config_err(format!("model `{e}`: {err}")))?);
            }
        }
    }
    Ok(out)
}

impl RunConfig {
    /// Reads and validates `path`. `seed` and `output_dir` override the file.
    pub fn load(path: &Path, seed: Option<u64>, output_dir: Option<PathBuf>) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base, seed, output_dir)
    }

    pub fn parse(text: &str, base: &Path, seed: Option<u64>, output_dir: Option<PathBuf>) -> anyhow::Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| config_err(format!("invalid config: {e}")))?;
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        let must_exist = |p: PathBuf, what: &str| -> anyhow::Result<PathBuf> {
            if p.exists() {
                Ok(p)
            } else {
                Err(config_err(format!("{what} not found: {}", p.display())))
            }
        };

        let seed = seed
            .or(raw.seed)
            .ok_or_else(|| config_err("a seed is required (config `seed` or --seed)"))?;
        let output_dir = match output_dir {
            Some(p) => p,
            None => resolve(&raw.output_dir.unwrap_or_else(|| PathBuf::from("output"))),
        };
        let resolution: Resolution = raw
            .resolution
            .parse()
            .map_err(|e| config_err(format!("resolution: {e}")))?;
        let min_period_fraction = raw.min_period_fraction.unwrap_or(DEFAULT_MIN_PERIOD_FRACTION);
        if !(0.0..=1.0).contains(&min_period_fraction) {
            return Err(config_err(format!("min_period_fraction {min_period_fraction} outside [0, 1]")));
        }
        let corpus_format: CorpusFormat = raw
            .corpus
            .format
            .parse()
            .map_err(|e| config_err(format!("corpus format: {e}")))?;
        let corpus_path = must_exist(resolve(&raw.corpus.path), "corpus")?;
        let lexicon = must_exist(resolve(&raw.lexicon), "lexicon file")?;
        let stopwords = raw
            .stopwords
            .map(|p| must_exist(resolve(&p), "stopword file"))
            .transpose()?;

        let mut names = BTreeSet::new();
        let mut indicators = Vec::new();
        for ind in raw.indicator {
            if !names.insert(ind.name.clone()) {
                return Err(config_err(format!("duplicate indicator `{}`", ind.name)));
            }
            let p = must_exist(resolve(&ind.path), &format!("indicator `{}`", ind.name))?;
            indicators.push((ind.name, p));
        }

        let cv = raw.cv.map(|c| CvPlan {
            folds: c.folds,
            initial: c.initial,
            validation: c.validation,
            expanding: c.expanding,
        });

        let mut tasks = Vec::new();
        let mut task_names = BTreeSet::new();
        for t in raw.task {
            if !names.contains(&t.indicator) {
                return Err(config_err(format!("task references unknown indicator `{}`", t.indicator)));
            }
            let mut targets = Vec::new();
            for &h in &t.horizons {
                if h == 0 {
                    return Err(config_err("horizons must be at least 1"));
                }
                targets.push(Target::Level(h));
            }
            if t.delta {
                targets.push(Target::Delta);
            }
            if targets.is_empty() {
                return Err(config_err(format!("task on `{}` has no horizons and no delta target", t.indicator)));
            }
            let models = expand_models(&t.models, &t.lags)?;
            if models.is_empty() {
                return Err(config_err(format!("task on `{}` lists no models", t.indicator)));
            }
            let baseline: ModelSpec = match &t.baseline {
                Some(b) => b.parse().map_err(|e| config_err(format!("baseline `{b}`: {e}")))?,
                None => ModelSpec::ar(1),
            };
            for target in targets {
                let name = format!("{}-{target}", t.indicator);
                if !task_names.insert(name.clone()) {
                    return Err(config_err(format!("duplicate task `{name}`")));
                }
                tasks.push(TaskConfig {
                    indicator: t.indicator.clone(),
                    task: ForecastTask {
                        name,
                        target,
                        models: models.clone(),
                        baseline,
                    },
                });
            }
        }

        Ok(RunConfig {
            seed,
            output_dir,
            resolution,
            min_period_fraction,
            corpus_path,
            corpus_format,
            lexicon,
            stopwords,
            indicators,
            cv,
            tasks,
        })
    }
}
