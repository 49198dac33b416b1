use thiserror::Error;

/// Errors produced by the library.
///
/// The variants fall into two families: input problems (`Domain`,
/// `Precondition`, `Contract`, `Existence`) and numerical problems
/// (`Quality`, `Quadrature`). The CLI maps the first family to exit code 2
/// and the second to exit code 3.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("contract violated: {0}")]
    Contract(String),

    /// ψ(λ) = E[log(1+λX)] diverges, so neither the mean functional nor the
    /// GGC variable exists.
    #[error("existence error: {0}")]
    Existence(String),

    /// A result failed a numerical sanity check (e.g. a CDF outside [0,1]).
    #[error("numerical quality error: {message} (estimated error {estimate:e})")]
    Quality { message: String, estimate: f64 },

    #[error("quadrature failed: {message} (value {value:e}, error {error:e})")]
    Quadrature {
        message: String,
        value: f64,
        error: f64,
    },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn quality(msg: impl Into<String>, estimate: f64) -> Self {
        Error::Quality {
            message: msg.into(),
            estimate,
        }
    }

    /// Short machine-readable category, used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Precondition(_) => "precondition",
            Error::Contract(_) => "contract",
            Error::Existence(_) => "existence",
            Error::Quality { .. } => "quality",
            Error::Quadrature { .. } => "quadrature",
        }
    }

    /// True for failures caused by numerics rather than by the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Quality { .. } | Error::Quadrature { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
