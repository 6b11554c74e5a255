use thiserror::Error;

/// Errors produced by the optimization core.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates a documented precondition.
    #[error("invalid input: {0}")]
    Validation(String),

    /// A numerical routine could not produce a finite, well-conditioned result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Exact hypervolume is limited to low objective counts; larger fronts
    /// must go through the Monte Carlo estimator.
    #[error(
        "exact hypervolume supports at most {max} objectives (got {got}); \
         use hypervolume_mc for higher dimensions"
    )]
    TooManyObjectives { got: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
