use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("norm diverges: tail exponent {exponent} must exceed {required}")]
    DivergentNorm { exponent: f64, required: f64 },

    #[error("lemma hypothesis unmet: {0}")]
    HypothesisUnmet(String),

    #[error("truncation too coarse: omitted tail mean {omitted:e} exceeds {allowed:e}")]
    TruncationTooCoarse { omitted: f64, allowed: f64 },

    #[error("inequality chain violated: lhs {lhs:e} > rhs {rhs:e} ({detail})")]
    ChainViolation { lhs: f64, rhs: f64, detail: String },

    #[error("quadrature did not converge: error estimate {estimate:e} above tolerance {tolerance:e}")]
    QuadratureNonconvergence { estimate: f64, tolerance: f64 },

    #[error("Fourier grid too coarse: truncation bound {bound:e} exceeds tolerance {tolerance:e}")]
    GridTooCoarse { bound: f64, tolerance: f64 },

    #[error("singular linear system (ridge {ridge:e} applied)")]
    SingularSystem { ridge: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// `line` is 0 for command-line overrides.
    #[error("parse error on line {line}, key `{key}`: {reason}")]
    Parse { line: usize, key: String, reason: String },

    #[error("validation error for `{key}`: {constraint}")]
    Validation { key: String, constraint: String },

    #[error("too many failed replications at n = {n}: {last}")]
    ReplicationFailures { n: u64, last: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
