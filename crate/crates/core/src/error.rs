use thiserror::Error;

pub type Result<T, E = HdmdError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HdmdError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("gram matrix has no eigenvalue above the rank threshold")]
    ZeroRank,

    #[error("operation requires a Hermitian DMD operator, got {0:?}")]
    WrongKind(crate::dmd::KoopmanKind),

    #[error("inputs were built from different gram pairs")]
    GramMismatch,

    #[error("{0} failed to converge")]
    NoConvergence(&'static str),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HdmdError {
    pub(crate) fn arg(name: &'static str, reason: impl Into<String>) -> Self {
        HdmdError::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}
