use thiserror::Error;

/// Errors raised by the estimation engine.
///
/// Variants fall into three families that the command-line front end maps
/// onto exit codes: argument/validation problems, data problems and numeric
/// failures. See [`Error::category`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("no data series")]
    NoDataSeries,

    #[error("domain error in series `{series}` at year {year}: {message}")]
    Domain {
        series: String,
        year: i32,
        message: String,
    },

    #[error("insufficient sample: {0}")]
    InsufficientSample(String),

    #[error("no common sample across series")]
    NoCommonSample,

    #[error("unknown series `{name}` (available: {available})")]
    UnknownSeries { name: String, available: String },

    #[error("singular design: column(s) {} are linearly dependent", .columns.join(", "))]
    SingularDesign { columns: Vec<String> },

    #[error("degenerate regression: {0}")]
    Degenerate(String),

    #[error("unsupported number of regressors k = {k} (tables cover {min}..={max})")]
    UnsupportedK { k: usize, min: usize, max: usize },

    #[error("simulation diverged in draw {draw} at period {period}")]
    Diverged { draw: usize, period: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("io error: {0}")]
    Io(String),
}

/// Coarse classification of an [`Error`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Validation,
    Data,
    Numeric,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Argument(_) | Error::UnsupportedK { .. } | Error::UnknownSeries { .. } => {
                ErrorCategory::Validation
            }
            Error::Parse { .. }
            | Error::Integrity(_)
            | Error::NoDataSeries
            | Error::Domain { .. }
            | Error::InsufficientSample(_)
            | Error::NoCommonSample
            | Error::Io(_) => ErrorCategory::Data,
            Error::SingularDesign { .. }
            | Error::Degenerate(_)
            | Error::Diverged { .. }
            | Error::Numeric(_) => ErrorCategory::Numeric,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
