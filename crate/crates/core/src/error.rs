use thiserror::Error;

/// Errors raised by channel generation, precoder design and file parsing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("requested {requested} streams but the matrix has numerical rank {rank}")]
    RankDeficient { requested: usize, rank: usize },

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible connectivity: {0}")]
    InfeasibleConnectivity(String),

    #[error("no rank-{n_streams} initial analog precoder found after {attempts} draws")]
    InitializationFailed { n_streams: usize, attempts: usize },

    #[error("malformed {kind} file: {reason}")]
    Parse { kind: &'static str, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
