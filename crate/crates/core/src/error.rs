use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("inadmissible state at grid point {point} (cone margin {margin:e})")]
    Admissibility { point: usize, margin: f64 },

    #[error("flow breakdown at t = {t}: {reason}")]
    FlowBreakdown {
        t: f64,
        reason: String,
        margins: Vec<f64>,
    },

    #[error("no convergence by t = {t_max} (residual {residual:e})")]
    NonConvergence { t_max: f64, residual: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("diagnostic failure: {0}")]
    Diagnostic(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Argument(_) | Error::Unsupported(_) => 2,
            Error::Admissibility { .. } | Error::FlowBreakdown { .. } => 3,
            Error::NonConvergence { .. } => 3,
            Error::Domain(_) | Error::Diagnostic(_) => 1,
            Error::Io(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
