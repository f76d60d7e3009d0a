use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("moment of order {order} diverges: n*alpha = 2")]
    Singularity { order: usize },

    #[error("degenerate annulus: r_min = r_max = {0}")]
    DegenerateAnnulus(f64),

    #[error("cumulant vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("lognormal matching undefined for kappa_1 = {0}")]
    MatchingUndefined(f64),

    #[error("truncated series tail mass {tail:.3e} exceeds bound {bound:.3e}")]
    TailMassExceeded { tail: f64, bound: f64 },

    #[error("index {index} out of range 0..={max}")]
    OutOfRange { index: usize, max: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("splitting tree did not resolve within {0} slots")]
    SlotGuard(u64),

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
}
