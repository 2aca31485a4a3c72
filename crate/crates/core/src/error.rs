use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by every stage of the pipeline.
///
/// Each variant maps onto one error category that the command-line front-end
/// turns into a distinct exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("parse error in {file} at line {line}: {message}")]
    Parse {
        file: String,
        line: u64,
        message: String,
    },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("empty set: {0}")]
    EmptySet(String),

    #[error("numeric error at record {record}: {message}")]
    Numeric { record: usize, message: String },

    #[error("degenerate class {class}: {message}")]
    DegenerateClass { class: u8, message: String },

    #[error("initialization error: {0}")]
    Initialization(String),

    #[error("learning error: {0}")]
    Learning(String),

    #[error("sampler error: {0}")]
    Sampler(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse error category, stable across releases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Argument,
    Parse,
    Integrity,
    Numeric,
    Learning,
    Io,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidArgument(_)
            | Error::NotFound(_)
            | Error::Config(_)
            | Error::EmptySet(_) => ErrorCategory::Argument,
            Error::Parse { .. } => ErrorCategory::Parse,
            Error::Integrity(_) => ErrorCategory::Integrity,
            Error::Numeric { .. } | Error::Sampler(_) => ErrorCategory::Numeric,
            Error::DegenerateClass { .. } | Error::Initialization(_) | Error::Learning(_) => {
                ErrorCategory::Learning
            }
            Error::Io { .. } => ErrorCategory::Io,
        }
    }

    /// Name of the module family that raised the error, used to prefix CLI messages.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Parse { .. } | Error::Io { .. } => "data_io",
            Error::Integrity(_) => "graph",
            Error::Numeric { .. } => "model",
            Error::DegenerateClass { .. } | Error::Initialization(_) | Error::Learning(_) => "em",
            Error::Sampler(_) => "sampling",
            Error::Config(_) => "features",
            Error::InvalidArgument(_) | Error::NotFound(_) | Error::EmptySet(_) => "args",
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
