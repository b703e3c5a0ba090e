use thiserror::Error;

#[derive(Debug, Error)]
pub enum QslError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("bad matrix shape: {0}")]
    Shape(String),

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not skew-Hermitian (defect {0:.3e})")]
    NotSkewHermitian(f64),

    #[error("inconsistent group parameters: {0}")]
    GroupParameters(String),

    #[error("no tabulated diameter for {0}")]
    NoTabulatedDiameter(String),

    #[error("bound undefined: zero drift speed")]
    ZeroDrift,

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = QslError> = std::result::Result<T, E>;
