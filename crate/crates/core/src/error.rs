use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("zero has no multiplicative inverse")]
    ZeroInverse,

    #[error("degenerate message: all probabilities vanished")]
    DegenerateMessage,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible degree profile: {0}")]
    InfeasibleProfile(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("symbol {value} out of range for field of order {q}")]
    SymbolOutOfRange { value: u32, q: usize },

    #[error("alist parse error at line {line}: {msg}")]
    Alist { line: usize, msg: String },

    #[error("unknown scheme preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Short machine-readable category, used by the CLI and the C bindings.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidField(_) => "invalid-field",
            Error::ZeroInverse => "zero-inverse",
            Error::DegenerateMessage => "degenerate-message",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::InfeasibleProfile(_) => "infeasible-profile",
            Error::LengthMismatch { .. } => "length-mismatch",
            Error::SymbolOutOfRange { .. } => "symbol-out-of-range",
            Error::Alist { .. } => "alist-parse",
            Error::UnknownPreset(_) => "unknown-preset",
            Error::InvalidScheme(_) => "invalid-scheme",
            Error::Io { .. } => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
