use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{base}^{exponent} does not fit in a signed 128-bit integer")]
    PowerOverflow { base: i64, exponent: u32 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("tridiagonal eigensolver did not converge for eigenvalue {index} after {iterations} sweeps")]
    EigenNoConvergence { index: usize, iterations: usize },

    #[error("energy {energy} lies outside the spectrum [{e_min}, {e_max}]")]
    EnergyOutsideSpectrum { energy: f64, e_min: f64, e_max: f64 },

    #[error("degenerate spectrum: e_max == e_min == {0}")]
    DegenerateSpectrum(f64),

    #[error("{0} must be odd")]
    NotOdd(&'static str),

    #[error("{0} must be even")]
    NotEven(&'static str),

    #[error("fit refused: {0}")]
    FitRefused(String),

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error on {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
