use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("unbounded set: {0} needs finite endpoints")]
    Unbounded(&'static str),
    #[error("degenerate normalization: a = 0 with k1*k2 > 0 makes tau(R) vanish")]
    DegenerateSource,
    #[error("divergent moment: {0}")]
    Divergent(String),
    #[error("precision exhausted: {0}")]
    Precision(String),
    #[error("evaluation failed at {point}: {reason}")]
    Evaluation { point: String, reason: String },
    #[error("missing partial derivative {0}")]
    MissingPartial(String),
    #[error("derivative order {0} exceeds the supported maximum of 4")]
    OrderOverflow(usize),
    #[error("discretization failure: {0}")]
    Discretization(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// Exit code class used by the command line: 2 for bad input, 3 for numerical trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid(_) | Error::Unbounded(_) | Error::DegenerateSource | Error::Divergent(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
