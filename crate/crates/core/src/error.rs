use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A register that must split evenly was given an odd cell count.
    #[error("cell count must be even, got {0}")]
    OddCells(usize),

    #[error("cell count {n} outside supported range [{min}, {max}]")]
    Capacity { n: usize, min: usize, max: usize },

    #[error("coordinate {x} outside the simulated interval [{lo}, {hi})")]
    CoordinateOutOfRange { x: f64, lo: f64, hi: f64 },

    #[error("index {index} out of range for {len} cells")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("states live on different grids")]
    GridMismatch,

    #[error("incompatible register sizes: query has {n} cells, ancilla has {m}")]
    RegisterSizes { n: usize, m: usize },

    #[error("dense path limited to dimension {max}, requested {dim}")]
    DenseCap { dim: usize, max: usize },

    #[error("measurement window [{lo}, {hi}] not contained in [0, {n})")]
    InvalidWindow { lo: i64, hi: i64, n: usize },

    #[error("decision threshold must lie in (0, 1), got {0}")]
    InvalidThreshold(f64),

    #[error("query budget must be at least 2, got {0}")]
    QueryBudget(usize),

    #[error(transparent)]
    Dsl(#[from] DslError),

    #[error("malformed state dump: {0}")]
    StateDump(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Error classes of the function mini-language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DslErrorKind {
    Syntax,
    InvalidBit,
    InvalidInterval,
    Overlap,
    CoverageGap,
}

impl fmt::Display for DslErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DslErrorKind::Syntax => "syntax error",
            DslErrorKind::InvalidBit => "invalid bit",
            DslErrorKind::InvalidInterval => "invalid interval",
            DslErrorKind::Overlap => "overlapping pieces",
            DslErrorKind::CoverageGap => "coverage gap",
        };
        f.write_str(s)
    }
}

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at {pos}: {message}")]
pub struct DslError {
    pub kind: DslErrorKind,
    pub pos: Position,
    pub message: String,
}

impl DslError {
    pub(crate) fn new(kind: DslErrorKind, pos: Position, message: impl Into<String>) -> Self {
        DslError {
            kind,
            pos,
            message: message.into(),
        }
    }
}
