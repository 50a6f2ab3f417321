use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: malformed Matrix Market header: {reason}")]
    MalformedHeader { line: usize, reason: String },

    #[error("line {line}: entry ({row}, {col}) outside declared {rows}x{cols} matrix")]
    EntryOutOfBounds { line: usize, row: u64, col: u64, rows: usize, cols: usize },

    #[error("line {line}: expected {expected} entries, found {found}")]
    TruncatedEntries { line: usize, expected: usize, found: usize },

    #[error("line {line}: malformed entry: {reason}")]
    MalformedEntry { line: usize, reason: String },

    #[error("line {line}: invalid token {token:?}")]
    InvalidToken { line: usize, token: String },

    #[error("line {line}: negative vertex id {token}")]
    NegativeId { line: usize, token: String },

    #[error("vertex id {id} out of range (n = {n})")]
    IdOutOfRange { id: usize, n: usize },

    #[error("requested {m} edges but only {max} possible")]
    TooManyEdges { m: usize, max: usize },

    #[error("invalid instance spec: {0}")]
    InvalidSpec(String),

    #[error("graph too large for exhaustive oracle: {0}")]
    OracleLimit(String),

    #[error("vertex {0} is not alive")]
    DeadVertex(u32),

    #[error("vertices {0} and {1} lie on different sides")]
    SideMismatch(u32, u32),

    #[error("vertex {0} cannot absorb itself")]
    SelfAbsorb(u32),

    #[error("matching tree inconsistent: {0}")]
    Inconsistent(String),

    #[error("report: {0}")]
    Report(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
