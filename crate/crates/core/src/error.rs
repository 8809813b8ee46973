use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("optimization error: {0}")]
    Optimization(String),

    #[error("estimation error: {0}")]
    Estimation(String),
}

impl Error {
    /// True for errors caused by the caller's inputs or configuration, as
    /// opposed to failures that happen while computing on valid inputs.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Io(_)
                | Error::Format(_)
                | Error::Parse { .. }
                | Error::Domain(_)
                | Error::Argument(_)
                | Error::Unsupported(_)
        )
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Argument(format!(
            "dimension mismatch: expected {expected}, got {got}"
        )));
    }
    Ok(())
}
