use thiserror::Error;

/// Errors raised by the operator, shorting, projection, truncation and
/// conditioning routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("AsymmetricInput: symmetry defect {defect:e} exceeds tolerance {tol:e}")]
    AsymmetricInput { defect: f64, tol: f64 },

    #[error("NotPositive: smallest eigenvalue {min_eigenvalue:e} below bound {bound:e}")]
    NotPositive { min_eigenvalue: f64, bound: f64 },

    #[error("DimensionMismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("NonFinite: input contains NaN or infinite entries")]
    NonFinite,

    #[error("NotSquare: {rows}x{cols} matrix")]
    NotSquare { rows: usize, cols: usize },

    #[error("InvalidSplit: {0}")]
    InvalidSplit(String),

    #[error("InvalidArgument: {0}")]
    InvalidArgument(String),

    #[error("SingularA22: condition number {condition:e} of the H2 block is not below {limit:e}")]
    SingularA22 { condition: f64, limit: f64 },

    #[error("RangeConditionViolated: range residual {residual:e} exceeds {limit:e}")]
    RangeConditionViolated { residual: f64, limit: f64 },

    #[error(
        "NoConvergence: regularized gaps {gaps:?} did not decrease over the final epsilon values"
    )]
    NoConvergence { gaps: Vec<f64> },

    #[error("EmptyIntersection: the two H1 subspaces intersect only in zero")]
    EmptyIntersection,

    #[error("NestingMismatch: direct and iterated shorts differ by {defect:e}")]
    NestingMismatch { defect: f64 },

    #[error("CompatibilitySolveFailed: solve residual {residual:e} exceeds {limit:e}")]
    CompatibilitySolveFailed { residual: f64, limit: f64 },

    #[error("CertificateMismatch: {0}")]
    CertificateMismatch(String),

    #[error("NotPSD: truncation n = {n} failed validation ({source})")]
    NotPsd {
        n: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("ParameterOutOfRange: {0}")]
    ParameterOutOfRange(String),

    #[error("Parse: {0}")]
    Parse(String),

    #[error("Io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SingularA22 { .. }
            | Error::RangeConditionViolated { .. }
            | Error::NoConvergence { .. }
            | Error::NestingMismatch { .. }
            | Error::CompatibilitySolveFailed { .. }
            | Error::CertificateMismatch(_) => 2,
            Error::Io(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
