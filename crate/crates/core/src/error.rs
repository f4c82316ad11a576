use std::path::PathBuf;

/// Errors raised anywhere in the forecasting pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Record {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("corpus at {0} contains no documents")]
    EmptyCorpus(PathBuf),

    #[error("duplicate document id `{id}` (line {line})")]
    DuplicateId { id: String, line: usize },

    #[error("corpus spans a single {0} period; at least two periods are required")]
    SinglePeriod(&'static str),

    #[error("invalid period label `{0}`")]
    InvalidPeriod(String),

    #[error("lexicon {path}: {message}")]
    Lexicon { path: PathBuf, message: String },

    #[error("no lexicon construct intersects the vocabulary ({0} constructs dropped)")]
    NoConstructs(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("need at least {required} rows, got {got}")]
    TooFewRows { required: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("requested {requested} components but the data only supports {max}")]
    RankExceeded { requested: usize, max: usize },

    #[error("design matrix is rank deficient (rank {rank} < {cols} columns); use a ridge or elastic-net penalty")]
    RankDeficient { rank: usize, cols: usize },

    #[error("coordinate descent did not converge in {sweeps} sweeps (max KKT violation {kkt_violation:.3e})")]
    NoConvergence { sweeps: usize, kkt_violation: f64 },

    #[error("response has zero variance")]
    ZeroVarianceResponse,

    #[error("invalid penalty: {0}")]
    InvalidPenalty(String),

    #[error("series of length {got} is too short; need more than {required} observations")]
    SeriesTooShort { required: usize, got: usize },

    #[error("score of construct `{0}` collapsed to zero variance")]
    ConstructCollapsed(String),

    #[error("outer weights did not converge in {iterations} iterations (last relative change {last_delta:.3e})")]
    OuterNoConvergence { iterations: usize, last_delta: f64 },

    #[error("invalid path model specification: {0}")]
    PathSpec(String),

    #[error("supervised dataset is empty: {periods} periods, max lag {max_lag}, horizon offset {horizon}")]
    EmptyDataset {
        periods: usize,
        max_lag: usize,
        horizon: usize,
    },

    #[error("infeasible cross-validation plan: need at least {min_rows} rows, have {rows}")]
    InfeasiblePlan { rows: usize, min_rows: usize },

    #[error("empty hyperparameter grid")]
    EmptyGrid,

    #[error("every grid point failed: {0}")]
    AllGridPointsFailed(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("constant test series; NRMSE undefined")]
    ConstantSeries,

    #[error("degenerate loss differential")]
    DegenerateDifferential,

    #[error("decomposition requires a path model")]
    NotAPathModel,

    #[error("invalid model configuration: {0}")]
    InvalidModel(String),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
