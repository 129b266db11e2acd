use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("value outside the domain of {operation}: {value}")]
    Domain { operation: &'static str, value: f64 },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("response has a single class ({ones} ones out of {rows} rows); the likelihood has no finite maximizer")]
    DegenerateResponse { ones: usize, rows: usize },

    #[error("{rows} rows cannot identify {params} parameters")]
    TooFewRows { rows: usize, params: usize },

    #[error("separation or collinearity detected: {0}")]
    Separation(String),

    #[error("fit did not converge after {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error("need at least {required} converged replicates, have {available}")]
    InsufficientReplicates { required: usize, available: usize },

    #[error("resampling unstable: only {converged} of {requested} replicates converged")]
    ResamplingInstability { converged: usize, requested: usize },

    #[error("empty test set")]
    EmptyTestSet,

    #[error("index {index} out of range for {len} rows")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("unknown predictor `{0}`")]
    UnknownPredictor(String),

    #[error("profile `{profile}` does not fix predictor `{predictor}`")]
    MissingPredictor { profile: String, predictor: String },

    #[error("missing column `{0}`")]
    MissingColumn(&'static str),

    #[error("row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("input contains no data rows")]
    EmptyInput,

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
