//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },

    #[error("schema error in {path}: missing column `{column}`")]
    Schema { path: String, column: String },

    #[error("validation error in {path} at data row {row}: {message}")]
    Validation {
        path: String,
        row: usize,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("eigenvalue degeneracy: gap between adjacent eigenvalues is {gap:.3e} (< {tol:.0e})")]
    EigenDegeneracy { gap: f64, tol: f64 },

    #[error("iteration did not converge after {iterations} steps (last residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("design matrix is rank deficient; collinear columns: {columns:?}")]
    RankDeficient { columns: Vec<String> },

    #[error("{0}")]
    Estimation(String),
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
