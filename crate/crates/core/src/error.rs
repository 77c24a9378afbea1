//! Crate-wide error type.
//!
//! Two broad families matter to callers: faults in how the library was
//! invoked (`Config`, `Usage`) and faults in external inputs or the
//! environment (`Io`, `Schema`, `Parse`). The CLI maps the first family to
//! exit code 2 and the second to exit code 1.

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A tunable was outside its documented range (qubit count, theta_max,
    /// probabilities, thresholds).
    #[error("configuration error: {0}")]
    Config(String),

    /// An operation was called with inconsistent arguments (length
    /// mismatches, out-of-range indices, empty inputs).
    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Input file is structurally wrong (missing columns, bad header line).
    #[error("schema error: {0}")]
    Schema(String),

    /// A cell or token failed to parse; `line` is 1-based within the file.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn schema(msg: impl Into<String>) -> Self {
        Error::Schema(msg.into())
    }

    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// Process exit code the CLI uses for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) => 2,
            Error::Io(_) | Error::Schema(_) | Error::Parse { .. } => 1,
        }
    }
}
