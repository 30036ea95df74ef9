use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("propagation failed at R = {radius:.6e}: {reason}")]
    Propagation { radius: f64, reason: String },

    #[error("energy {energy:.6e} is not below adiabat {adiabat} at R_max = {r_max:.6e}; enlarge R_max")]
    OpenAtOuterBoundary { energy: f64, r_max: f64, adiabat: usize },

    #[error("root search failed: {0}")]
    RootSearch(String),

    #[error("line {line}: {msg}")]
    Data { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
