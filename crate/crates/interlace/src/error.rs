use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not hermitian: max |M - M*| = {deviation:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("empty matrix")]
    EmptyMatrix,

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("matrix {index} is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { index: usize, min_eigenvalue: f64 },

    #[error("matrix is not a contraction: largest eigenvalue {max_eigenvalue:.6} > 1")]
    NotContraction { max_eigenvalue: f64 },

    #[error("block slot {slot} out of range 1..={blocks}")]
    BadSlot { slot: usize, blocks: usize },

    #[error("polynomial is not monic (leading coefficient {leading})")]
    NotMonic { leading: f64 },

    #[error("the zero polynomial has no roots")]
    ZeroPolynomial,

    #[error("constant polynomial has no roots")]
    ConstantPolynomial,

    #[error("polynomial is not real-rooted (imaginary residual {residual:.3e} > {tolerance:.1e})")]
    NotRealRooted { residual: f64, tolerance: f64 },

    #[error("size guard: {what} = {value} exceeds limit {limit}")]
    SizeGuard { what: &'static str, value: usize, limit: usize },

    #[error("value {value} is not in the support of distribution {index}")]
    ValueNotInSupport { index: usize, value: f64 },

    #[error("invalid distribution {index}: {reason}")]
    InvalidDistribution { index: usize, reason: String },

    #[error("descent step {level} increased the largest root from {parent:.12} to {child:.12}")]
    DescentIncrease { level: usize, parent: f64, child: f64 },

    #[error("sum of matrices exceeds the identity (largest eigenvalue {max_eigenvalue:.9})")]
    SumExceedsIdentity { max_eigenvalue: f64 },

    #[error("weight {index} = {value} is outside the allowed range")]
    WeightOutOfRange { index: usize, value: f64 },

    #[error("bad proportions: {0}")]
    BadProportions(String),

    #[error("epsilon {epsilon} outside the admissible range (0, {upper}] for rank cap {rank_cap}")]
    EpsilonOutOfRange { epsilon: f64, rank_cap: usize, upper: f64 },

    #[error("point is not above the roots (min eigenvalue {min_eigenvalue:.3e})")]
    NotAboveRoots { min_eigenvalue: f64 },

    #[error("bad delta {0}: must be positive")]
    BadDelta(f64),

    #[error("normalization violated: {0}")]
    QxNormalizationViolated(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation failed ({invariant}): {detail}")]
    Validation { invariant: String, detail: String },

    #[error("i/o error: {0}")]
    Io(String),
}
