use thiserror::Error;

/// Contract and validation failures raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: max |M - M^dagger| = {deviation:.3e}")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid matrix shape: {0}")]
    Shape(String),

    #[error("state is not normalized: norm = {norm}")]
    NotNormalized { norm: f64 },

    #[error("density matrix trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },

    #[error("positivity violated: eigenvalue {value:.3e}")]
    NegativeEigenvalue { value: f64 },

    #[error("Kraus operators are not trace preserving: residual {residual:.3e}")]
    NotTracePreserving { residual: f64 },

    #[error("invalid spin label {0:?}: expected a half-integer such as 1/2, 1, 3/2 or 0.5")]
    InvalidSpin(String),

    #[error("{what} out of range: {value} (allowed {min}..={max})")]
    OutOfRange {
        what: &'static str,
        value: i64,
        min: i64,
        max: i64,
    },

    #[error("rotation axis is not a unit vector: |n| = {norm}")]
    NonUnitAxis { norm: f64 },

    #[error("J^2 eigenvalue {value} is not within 1e-6 of any j(j+1)")]
    EigenvalueClustering { value: f64 },

    #[error("state is not rotation invariant: worst deviation {deviation:.3e}")]
    NotInvariant { deviation: f64 },

    #[error("internal consistency check failed ({what}): deviation {deviation:.3e}")]
    Inconsistent { what: String, deviation: f64 },

    #[error("spin 0 has no isotropic channel (s(s+1) = 0)")]
    ZeroSpin,

    #[error("invalid search configuration: {0}")]
    Config(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
