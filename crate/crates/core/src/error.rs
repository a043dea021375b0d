use thiserror::Error;

/// Errors raised by estimators, tests and the simulation harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("all time-kernel weights are zero for block {block} (b2 = {b2}, T = {t})")]
    DegenerateWindow { block: usize, b2: f64, t: usize },

    #[error("kernel {0} has no finite characteristic exponent; automatic bandwidths are not supported")]
    UnsupportedKernel(String),

    #[error("time kernel {0} is not admissible for automatic bandwidths")]
    NonConformingTimeKernel(String),

    #[error("coefficient |a1(u)| = {value} >= 1 at u = {u}")]
    NonStationary { u: f64, value: f64 },

    #[error("design matrix is singular or ill-conditioned (condition number {0:e})")]
    SingularDesign(f64),

    #[error("instrument cross-moment Z'X is singular")]
    SingularZX,

    #[error("sandwich bread L'WL is singular")]
    SingularBread,

    #[error("variance estimate {0} is not positive")]
    NonPositiveVariance(f64),

    #[error("test statistic undefined: {0}")]
    UndefinedStatistic(String),

    #[error("unknown model id `{0}`; expected one of M1, M2, M3, M4, M5, M6, M7, M8")]
    UnknownModel(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
