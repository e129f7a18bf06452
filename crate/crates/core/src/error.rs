use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the simulation library.
///
/// Dimension mismatches between vectors are contract violations and panic
/// instead of being reported here.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("out-of-sequence record: expected round {expected}, got {got}")]
    Sequencing { expected: u64, got: u64 },

    #[error("Langevin sampler diverged at round {round}")]
    SamplerDiverged { round: u64 },

    #[error("MLE did not converge (gradient norm {residual:.3e})")]
    Estimation { residual: f64 },

    #[error("posterior grid is empty")]
    EmptyGrid,

    #[error("no grid point has finite potential")]
    NoSupport,

    #[error("aggregation failed: {0}")]
    Aggregation(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
