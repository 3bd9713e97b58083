use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical error: {0}")]
    NumericalError(String),

    #[error("density matrix is rank deficient (lambda_min/lambda_max = {ratio:e}, floor {floor:e})")]
    RankDeficient { ratio: f64, floor: f64 },

    #[error("state Hamiltonian is degenerate (relative gap {gap:e} below {tol:e})")]
    DegenerateStateHamiltonian { gap: f64, tol: f64 },

    #[error("energy window [{lo}, {hi}] contains no leaf energy")]
    EmptyShell { lo: f64, hi: f64 },

    #[error("malformed {what}: {detail}")]
    Format { what: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn check_dims(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(invalid(format!("{what}: dimension mismatch ({expected} vs {got})")))
    }
}
