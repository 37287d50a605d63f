use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semi-definite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("vector is not in the probability simplex: {0}")]
    NotInSimplex(String),

    #[error("iterate is on the boundary (min eigenvalue {0:e})")]
    Boundary(f64),

    #[error(
        "eigensolver did not converge on {dim}x{dim} matrix (frobenius norm {frobenius:e}, max |entry| {max_abs:e})"
    )]
    EigenNonConvergence { dim: usize, frobenius: f64, max_abs: f64 },

    #[error("sample {index} is infeasible at the current point (inner product {value:e})")]
    InfeasibleSample { index: usize, value: f64 },

    #[error("invalid sample {index}: {reason}")]
    InvalidSample { index: usize, reason: String },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error(
        "barrier subproblem failed (eta {eta:e}, spectrum [{lambda_min:e}, {lambda_max:e}], residual {residual:e})"
    )]
    Subproblem {
        eta: f64,
        lambda_min: f64,
        lambda_max: f64,
        residual: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("coordinate {0} has zero column sum over all sensing vectors")]
    DeadCoordinate(usize),

    #[error("ground truth has zero norm")]
    ZeroGroundTruth,

    #[error("permanent of a {0}x{0} matrix refused (limit is 12)")]
    PermanentTooLarge(usize),

    #[error("negative Poisson rate {0}")]
    NegativeRate(f64),

    #[error("measurement ensemble invalid (deviation from completeness {0:e})")]
    InvalidEnsemble(f64),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
