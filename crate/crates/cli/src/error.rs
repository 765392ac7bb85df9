use fairmatch::bench::BenchError;
use fairmatch::exact::ExactError;
use fairmatch::graph::GraphError;
use fairmatch::lp::LpError;
use fairmatch::rounding::RoundingError;
use thiserror::Error;

/// Failures grouped by the exit code they map to.
#[derive(Debug, Error)]
pub enum CliError {
    /// Exit 1: the problem has no admissible answer.
    #[error("{0}")]
    Infeasible(String),
    /// Exit 2: bad flags, bad paths or malformed input files.
    #[error("{0}")]
    Usage(String),
    /// Exit 3: solver or I/O failure after the inputs were accepted.
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Infeasible(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<LpError> for CliError {
    fn from(e: LpError) -> Self {
        match e {
            LpError::Infeasible => CliError::Infeasible("the fair LP admits no matching mass".into()),
            LpError::Graph(g) => g.into(),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<RoundingError> for CliError {
    fn from(e: RoundingError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<ExactError> for CliError {
    fn from(e: ExactError) -> Self {
        match e {
            ExactError::Lp(lp) => lp.into(),
            ExactError::Graph(g) => g.into(),
            ExactError::TwoSidedSpec | ExactError::InvalidParameter(_) => CliError::Usage(e.to_string()),
            ExactError::Rounding(_) | ExactError::WorkLimit(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Json(_) | BenchError::Config(_) | BenchError::Schema(_) => CliError::Usage(e.to_string()),
            BenchError::Io(_) | BenchError::Csv(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}
