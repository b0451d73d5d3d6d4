use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input is outside the supported precision budget.
    #[error("{what} = {value} is out of range (maximum {max})")]
    OutOfRange {
        what: &'static str,
        value: u64,
        max: u64,
    },

    /// A documented precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A cut width does not satisfy the constraints of its decomposition.
    #[error("width {width} rejected: {constraint}")]
    InvalidWidth { width: f64, constraint: String },

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error("quadrature did not converge (estimated error {estimate:e})")]
    Quadrature { estimate: f64 },

    /// An equation in the exponent calculus has no solution.
    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("unknown bound template '{0}'")]
    UnknownTemplate(String),

    #[error("unknown derivation section '{0}'")]
    UnknownSection(String),

    /// Malformed or missing tabular data.
    #[error("data error: {0}")]
    Data(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::OutOfRange { .. } => "out_of_range",
            Error::Precondition(_) => "precondition",
            Error::InvalidWidth { .. } => "invalid_width",
            Error::Quadrature { .. } => "quadrature",
            Error::NoSolution(_) => "no_solution",
            Error::UnknownTemplate(_) => "unknown_template",
            Error::UnknownSection(_) => "unknown_section",
            Error::Data(_) => "data",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Data(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
