use thiserror::Error;

/// Errors produced by the K-frame toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("SVD did not converge for a {rows}x{cols} matrix")]
    SvdNoConvergence { rows: usize, cols: usize },

    #[error("invalid tolerance policy: {0}")]
    Tolerance(String),

    /// `witness` lies in the range of K but not in the span of the frame vectors.
    #[error("not a K-frame: range of K is not contained in the span of the frame vectors")]
    NotKFrame { witness: Vec<f64> },

    #[error("K is the zero operator; the lower K-frame bound is undefined")]
    ZeroOperator,

    /// Index is reported 1-based, matching the user-facing convention.
    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("combinatorial budget exceeded: {needed} subsets required, cap is {cap}")]
    Budget { needed: u128, cap: u128 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("restricted operator is not invertible (defect dimension {defect})")]
    SingularRestriction { defect: usize },

    #[error("matrix is not orthogonal (residual {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("not a valid K-dual (residual {residual:e})")]
    InvalidDual { residual: f64 },

    #[error("erasure pattern is ambiguous: erased-column submatrix has rank deficiency {deficiency}")]
    Ambiguous { deficiency: usize },

    #[error("annihilation condition (M - Gram) G^T = 0 fails: residual {residual:e}")]
    Annihilation { residual: f64 },

    #[error("expansion of projected dual vector {index} over surviving frame vectors fails: residual {residual:e}")]
    ExpansionHypothesis { index: usize, residual: f64 },

    #[error("erasure set does not satisfy the minimal redundancy condition")]
    MrcPrecondition,

    #[error("N is not an erasure-recovery matrix for F: ||N F^T|| = {residual:e}")]
    RecoveryMatrixPrecondition { residual: f64 },

    #[error("no certificate reached the target after {trials} trials")]
    SearchExhausted { trials: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by malformed input data rather than by a
    /// violated mathematical contract.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Json(_) | Error::Csv(_) | Error::Io(_) | Error::InvalidMatrix(_) | Error::NonFinite { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
