use thiserror::Error;

use crate::qubit::DensityMatrix;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Normalizing an outcome branch whose probability is (numerically) zero.
    #[error("impossible branch: outcome probability {probability:e} is zero")]
    ImpossibleBranch { probability: f64 },

    #[error("reversal does not exist for partial-collapse strength p = {0}")]
    NoReversal(f64),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("matrix has no positive eigenvalue; cannot project to a physical state")]
    Degenerate,

    /// The simplex search ran out of its evaluation budget. The best
    /// iterate found so far is returned so callers may still use it.
    #[error("maximum-likelihood search did not converge after {evaluations} evaluations")]
    NotConverged {
        evaluations: usize,
        best: Box<DensityMatrix>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
