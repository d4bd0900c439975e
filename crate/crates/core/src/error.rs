use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// The viability probability must lie in (0, 1].
    #[error("rho must lie in (0, 1], got {0}")]
    RhoOutOfRange(String),

    #[error("cannot parse rho from {input:?}: {reason}")]
    InvalidRho { input: String, reason: &'static str },

    #[error(
        "cannot parse product range from {0:?}: expected a nonnegative integer or \"unbounded\""
    )]
    InvalidRange(String),

    /// A request exceeds the size an exhaustive or per-subset routine supports.
    #[error("{what} supports n <= {limit}, got n = {n}")]
    ResourceBound {
        what: &'static str,
        limit: u64,
        n: u64,
    },

    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: &'static str, reason: String },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            field,
            reason: reason.into(),
        }
    }
}
