use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Entropy backend cannot be reached (missing device path, unreachable
    /// endpoint, failed metadata query).
    #[error("entropy backend unavailable: {0}")]
    DeviceUnavailable(String),

    /// The byte stream ended before the requested amount was read.
    #[error("short read: requested {requested} bytes, got {got}")]
    ShortRead { requested: usize, got: usize },

    /// Lower bound exceeds upper bound, or the range is too wide.
    #[error("invalid range [{lo}, {hi}]")]
    InvalidRange { lo: f64, hi: f64 },

    /// A parameter violates an operation precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// random_choice on an empty list.
    #[error("cannot choose from an empty list")]
    EmptyList,

    /// A graph with more edges than a simple graph on v vertices allows.
    #[error("too many edges: {edges} requested, {max} possible")]
    TooManyEdges { edges: u64, max: u64 },

    /// Square-matrix operation on a non-square matrix.
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    /// Hermitian-only operation on a matrix that is not Hermitian.
    #[error("matrix is not Hermitian (max |A - A^dag| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    /// Eigensolver iteration cap reached.
    #[error("eigensolver failed to converge")]
    NoConvergence,

    /// QR factorization of a numerically rank-deficient matrix.
    #[error("matrix is numerically rank-deficient")]
    RankDeficient,

    /// Matrix square root of a matrix with a significantly negative eigenvalue.
    #[error("matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    /// Operands have incompatible shapes.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A vector that should be a probability distribution is not.
    #[error("not a probability distribution: {0}")]
    NotDistribution(String),

    /// Unnormalizable sample (trace collapsed to zero); probability-zero event.
    #[error("degenerate sample: {0}")]
    Degenerate(String),

    /// Ancilla marginal of a dynamical-matrix draw is numerically singular.
    #[error("singular ancilla marginal in dynamical-matrix generation")]
    SingularAncilla,

    /// Malformed entropy backend specification string.
    #[error("invalid entropy spec {spec:?}: {reason}")]
    InvalidEntropySpec { spec: String, reason: String },

    /// Errors from file I/O (fixture devices, output files).
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed state file.
    #[error("invalid state file: {0}")]
    InvalidStateFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
