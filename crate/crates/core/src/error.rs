use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by ingestion, partitioning, and simulation.
#[derive(Debug)]
pub enum Error {
    Io(std::io::Error),
    /// Malformed input file; `line` is 1-based.
    Parse { line: usize, msg: String },
    InvalidParameter(String),
    DimensionMismatch(String),
    /// Block partitioning requires non-decreasing row degrees.
    UnsortedRows { row: usize },
    /// A metadata field does not fit its packed width.
    FieldOverflow(String),
    /// storage_ratio needs at least one warp task.
    EmptyPartition,
    /// A packed descriptor violates the metadata layout.
    BadDescriptor(String),
    /// Corrupt or truncated binary snapshot.
    BadSnapshot(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Io(e) => write!(f, "io error: {e}"),
            Error::Parse { line, msg } => write!(f, "parse error at line {line}: {msg}"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::UnsortedRows { row } => {
                write!(f, "input rows are not degree-sorted (degree decreases at row {row})")
            }
            Error::FieldOverflow(msg) => write!(f, "field overflow: {msg}"),
            Error::EmptyPartition => write!(f, "warp partition is empty"),
            Error::BadDescriptor(msg) => write!(f, "bad descriptor: {msg}"),
            Error::BadSnapshot(msg) => write!(f, "bad snapshot: {msg}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
