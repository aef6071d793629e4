use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite {what}: {value}")]
    NonFinite { what: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tolerance {requested:.3e} unreachable, best certified bound {best:.3e}")]
    ToleranceUnreachable { requested: f64, best: f64 },

    #[error("anchored points have different anchors ({left} vs {right})")]
    AnchorMismatch { left: f64, right: f64 },

    #[error("weight ratio alpha_(nu,1)/alpha_(nu,{j}) is unbounded")]
    UnboundedRatio { j: usize },

    #[error("divergent series: {0}")]
    Divergent(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("normal equations ill-conditioned (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),

    #[error("squared worst-case error {value:.3e} is negative beyond round-off allowance {allowance:.3e}")]
    NegativeGramForm { value: f64, allowance: f64 },

    #[error("point is active outside the index set (coordinate {coordinate})")]
    ActiveOutsideSet { coordinate: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
