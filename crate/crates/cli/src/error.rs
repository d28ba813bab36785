use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("output error: {0}")]
    Output(String),

    #[error("{0}")]
    Solver(#[from] meissner_core::Error),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    /// 1 for usage and configuration problems, 2 for solver non-convergence,
    /// 3 for invariant or verification failures.
    pub fn exit_code(&self) -> u8 {
        use meissner_core::Error as Core;
        match self {
            CliError::Config(_) | CliError::Io(_) | CliError::Output(_) => 1,
            CliError::NonConvergence(_) => 2,
            CliError::Verification(_) => 3,
            CliError::Solver(e) => match e {
                Core::Convergence { .. } => 2,
                Core::InvariantViolation(_) | Core::Discretization(_) => 3,
                Core::Domain(_) | Core::GridMismatch(_) | Core::Input(_) => 1,
            },
        }
    }
}
