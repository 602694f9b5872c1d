use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a potential needs at least one block")]
    NoBlocks,

    #[error("physical parameter `{name}` must be strictly positive and finite, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("position {sigma} lies below the constructed range (lower limit {lower})")]
    OutOfRange { sigma: f64, lower: f64 },

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("requested {requested} blocks but the potential only has {available}")]
    TooManyBlocks { requested: usize, available: usize },

    #[error("boundary vector did not converge after {n_used} blocks (last change {residual:e})")]
    NotConverged { n_used: usize, residual: f64 },

    #[error("lambda = {lambda} is not a bound-state root (matching residual {residual:e})")]
    NotARoot { lambda: f64, residual: f64 },

    #[error("lambda must be {expected}, got {lambda}")]
    WrongSign { lambda: f64, expected: &'static str },

    #[error("invalid scan range [{min}, {max}]")]
    InvalidRange { min: f64, max: f64 },

    #[error("no partner root within {rel_tol:e} of 4 x {lambda}")]
    MissingPartner { lambda: f64, rel_tol: f64 },

    #[error("empty spectrum report")]
    EmptyReport,

    #[error("packet support violation: {0}")]
    Support(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}
