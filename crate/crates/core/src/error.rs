use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum WalkError {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("insufficient data for regression: {usable} usable point(s) in window [{lo}, {hi}]")]
    InsufficientData { usable: usize, lo: f64, hi: f64 },

    #[error("theta iteration did not converge within {max_iter} iterations (last theta {last}, limit {limit})")]
    NonConvergence { max_iter: usize, last: f64, limit: f64 },

    #[error("state overflow at step {n}: x = {x:e}")]
    Overflow { n: u64, x: f64 },

    #[error(
        "confinement violated on path {path_index} at step {n}: zeta = {zeta:e} > bound {bound:e} (x = {x}, y = {y})"
    )]
    ZetaViolation {
        path_index: u64,
        n: u64,
        x: f64,
        y: f64,
        zeta: f64,
        bound: f64,
    },

    #[error("cannot merge summaries: {0}")]
    Merge(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
}

impl WalkError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        WalkError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures that falsify an exact invariant rather than bad input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, WalkError::ZetaViolation { .. })
    }
}

pub type Result<T> = std::result::Result<T, WalkError>;
