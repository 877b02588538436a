use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("distinct quadruples unavailable: need n >= 4, got n = {0}")]
    TooFewForQuadruples(usize),

    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    #[error("matrix is not positive definite: pivot {pivot} is {value:e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("degenerate trace estimate: {0:e}")]
    DegenerateTrace(f64),

    #[error("degenerate variance estimate: {0:e}")]
    DegenerateVariance(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("too few replications: need at least {needed}, got {got}")]
    TooFewReplications { needed: usize, got: usize },

    #[error("replication {replication}, test {test}: {source}")]
    Replication {
        replication: usize,
        test: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{cell}: {source}")]
    Cell {
        cell: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
