use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// `psi_k(z) = target` has no positive root because `target <= k`.
    #[error("no root: psi_{k}(z) = {target} requires target > {k}")]
    NoRoot { k: u32, target: f64 },

    #[error("unsupported core parameters ({k1},{k2}): {reason}")]
    Unsupported { k1: u32, k2: u32, reason: &'static str },

    /// A closed-form approximation is undefined at this argument.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("graph with {n} vertices is too large for exhaustive search (limit {limit})")]
    TooLarge { n: usize, limit: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
