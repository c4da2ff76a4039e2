use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Power iteration failed to reach the residual target. Usually means
    /// the spanning-tree condition is violated or the matrix is nearly
    /// reducible.
    #[error("eigenvector iteration did not converge: residual {residual:.3e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },

    /// The deflated mixing matrix is not a contraction.
    #[error("deflated mixing matrix has spectral radius {radius} >= 1")]
    DegenerateSpectrum { radius: f64 },

    /// The 1-D argmin solver could not bracket a root. Impossible for a
    /// valid convex cost model; signals corrupted inputs.
    #[error("argmin subproblem root bracketing failed: {0}")]
    RootFindFailure(String),

    /// A broadcast was recorded with a non-increasing iteration index.
    #[error("broadcast out of order for agent {agent}: iteration {attempted} not after {last}")]
    OutOfOrder {
        agent: usize,
        last: usize,
        attempted: usize,
    },

    /// Scenario failed validation; the message names the violated assumption.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// The two-variable error-system matrix is not contractive at the
    /// candidate step size.
    #[error("error-system matrix has spectral radius {lambda} >= 1 at the candidate step size")]
    LambdaNotContractive { lambda: f64 },

    /// The linear-rate certificate failed its consistency checks.
    #[error("linear-rate certificate failure: {0}")]
    CertificateFailure(String),

    /// The balance constraint cannot be met inside the boxes.
    #[error("infeasible allocation: {0}")]
    Infeasible(String),

    /// Scenario file could not be parsed.
    #[error("scenario parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for input/validation problems,
    /// 3 for solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::InvalidScenario(_) | Error::Infeasible(_) => 2,
            Error::NonConvergence { .. }
            | Error::DegenerateSpectrum { .. }
            | Error::RootFindFailure(_)
            | Error::OutOfOrder { .. }
            | Error::LambdaNotContractive { .. }
            | Error::CertificateFailure(_) => 3,
            Error::Io(_) => 1,
        }
    }
}
