use thiserror::Error;

/// Errors raised by the linear-algebra, channel and certification layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not positive semidefinite (minimum eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    #[error("Kraus operators are not trace preserving (defect {defect:e})")]
    NotTracePreserving { defect: f64 },

    #[error("eigenvalue {eigenvalue:e} lies outside the domain of the scalar function")]
    Domain { eigenvalue: f64 },

    #[error("logarithm derivative needs a positive definite argument (eigenvalue {eigenvalue:e})")]
    SingularLog { eigenvalue: f64 },

    #[error("eigensolver did not converge (dim {dim}, norm {norm:e})")]
    EigenNonConvergence { dim: usize, norm: f64 },

    #[error("not a channel Choi operator (min eigenvalue {min_eig:e}, trace defect {tp_defect:e})")]
    InvalidChoi { min_eig: f64, tp_defect: f64 },

    #[error("invalid measurement: {0}")]
    InvalidPovm(String),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("projection did not converge after {iters} iterations (psd defect {psd_defect:e}, trace defect {tp_defect:e})")]
    MaxItersExceeded { iters: usize, psd_defect: f64, tp_defect: f64 },

    #[error("dimension {dim} exceeds the cap of {cap}")]
    DimsTooLarge { dim: usize, cap: usize },

    #[error("invalid problem file: {0}")]
    Schema(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Schema(e.to_string())
    }
}
