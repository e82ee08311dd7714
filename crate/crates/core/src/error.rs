use thiserror::Error;

/// Errors raised while building or analysing curve ensembles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value at row {row}, column {column}")]
    NonFiniteValue { row: usize, column: usize },

    #[error("pointwise tie at grid index {column} between curves {first} and {second}")]
    PointwiseTie {
        column: usize,
        first: usize,
        second: usize,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("zero pooled variance at grid index {column}")]
    ZeroVariance { column: usize },

    #[error("permutation row {row}: {attempts} consecutive label permutations had zero variance")]
    RetryCapExhausted { row: usize, attempts: usize },

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("{path}: {}{message}", line_label(*line))]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{0}")]
    Io(String),
}

fn line_label(line: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!("line {line}: ")
    }
}

pub type Result<T> = std::result::Result<T, Error>;
