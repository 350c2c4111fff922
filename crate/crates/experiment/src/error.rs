use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("infeasible connectivity: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Core(#[from] switchbf::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ExperimentError {
    /// Process exit code: 2 for configuration problems, 3 for infeasible
    /// connectivity, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Infeasible(_) | Self::Core(switchbf::Error::InfeasibleConnectivity(_)) => 3,
            Self::Core(switchbf::Error::InvalidParameter(_) | switchbf::Error::Parse { .. }) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, ExperimentError>;
