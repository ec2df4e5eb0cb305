use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the domain where a closed form or operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A time integration produced non-finite or runaway values.
    #[error("divergence in {what} at step {step}")]
    Divergence { what: String, step: usize },

    /// Operand shapes or grids disagree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Iterative or direct numerical procedure failed its residual contract.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn divergence(what: impl Into<String>, step: usize) -> Self {
        Error::Divergence {
            what: what.into(),
            step,
        }
    }
}
