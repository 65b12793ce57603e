use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("convergence failure in {what}: last residual {residual:e}")]
    Convergence { what: String, residual: f64 },
    #[error("singular configuration: {0}")]
    Singular(String),
    #[error("degenerate solution: {0}")]
    Degenerate(String),
    #[error("no root in bracket: {0}")]
    Existence(String),
    #[error(
        "index did not stabilize up to K = {max_modes}: last counts (phi, nu) = {last:?}, previous = {previous:?}"
    )]
    IndexUnstable {
        max_modes: usize,
        last: (usize, usize),
        previous: (usize, usize),
    },
    #[error("curve extraction failed at e = {e}: {reason}")]
    CurveExtraction { e: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
