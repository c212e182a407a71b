//! Error type shared by the whole crate.

use thiserror::Error;

/// Errors produced by problem construction, factorization and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix dimension does not match the problem size.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// A block vector does not follow the block-size pattern required by the
    /// operation (e.g. the mixed n/p pattern of the low-rank linearization).
    #[error("invalid block structure: {0}")]
    BlockStructure(String),

    /// The right-hand side maps to a zero Krylov starting vector.
    #[error("empty Krylov space: A(0)^-1 b is zero")]
    EmptyKrylov,

    /// A derivative order was requested that the problem cannot supply.
    #[error("derivative order {order} unavailable (problem stores orders up to {available})")]
    DerivativeOrderUnavailable { order: usize, available: usize },

    /// A matrix that must be inverted is singular to working precision.
    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    /// A dense-assembly size guard was exceeded.
    #[error("size guard exceeded in {context}: {requested} > {limit}")]
    SizeGuard {
        context: &'static str,
        requested: usize,
        limit: usize,
    },

    /// The problem definition itself is inconsistent (bad manifest, bad sizes).
    #[error("problem definition error: {0}")]
    ProblemDefinition(String),

    /// An index or count is out of the valid range.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// A residual history contains no usable (non-stagnated) entries.
    #[error("convergence factor undefined: {0}")]
    UndefinedFactor(String),

    /// The dense eigensolver failed to converge.
    #[error("eigensolver failed: {0}")]
    EigFailure(String),

    /// File input/output failure, with the offending path.
    #[error("i/o error for {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// A Matrix Market file could not be parsed.
    #[error("matrix market parse error in {path}: {message}")]
    MatrixMarket { path: String, message: String },

    /// A problem manifest could not be parsed.
    #[error("manifest error in {path}: {message}")]
    Manifest { path: String, message: String },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
