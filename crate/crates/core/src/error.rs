use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A metric or integrand was evaluated at a point excluded from its domain.
    #[error("domain error: {what} at {point:?}")]
    Domain { what: String, point: Vec<f64> },

    /// An integrand returned NaN or an infinity.
    #[error("non-finite integrand value {value} at {point:?}")]
    NonFinite { value: f64, point: Vec<f64> },

    #[error("point {point:?} on S({r}) matches no region")]
    CoverageViolation { r: f64, point: Vec<f64> },

    #[error("insufficient data: {usable} usable points, need {needed}")]
    InsufficientData { usable: usize, needed: usize },

    /// The requested sampler cannot resolve the integrand at this radius.
    #[error("sampler invalid: {0}")]
    SamplerInvalid(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shell at r = {r} failed: {source}")]
    Shell {
        r: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// The underlying error with shell context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Shell { source, .. } => source.root(),
            e => e,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn at_shell(self, r: f64) -> Self {
        match self {
            e @ Error::Shell { .. } => e,
            e => Error::Shell {
                r,
                source: Box::new(e),
            },
        }
    }
}
