use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("algebra must have at least one block")]
    EmptyAlgebra,
    #[error("block {index} has non-positive weight {weight}")]
    NonpositiveWeight { index: usize, weight: f64 },
    #[error("block {index} has zero dimension")]
    ZeroDimension { index: usize },
    #[error("elements belong to different algebras")]
    AlgebraMismatch,
    #[error("block {index}: expected {expected}x{expected} matrix, got {rows}x{cols}")]
    ShapeMismatch {
        index: usize,
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("element contains a non-finite entry")]
    NonFinite,
    #[error("element is not self-adjoint (asymmetry {asymmetry:e}, allowed {allowed:e})")]
    NotSelfAdjoint { asymmetry: f64, allowed: f64 },
    #[error("element is not positive (eigenvalue {eigenvalue:e} below {allowed:e})")]
    NotPositive { eigenvalue: f64, allowed: f64 },
    #[error("function {function} overflows at argument {argument}")]
    DomainOverflow { function: String, argument: f64 },
    #[error("exponent p must be positive, got {0}")]
    NonpositiveP(f64),
    #[error("sampled second differences of psi contradict class {expected} for {function}")]
    ClassificationMismatch { function: String, expected: String },
    #[error("weights violate constraint {mode}: residual {residual:e}")]
    WeightConstraintViolated { mode: String, residual: f64 },
    #[error("weights must be positive and finite")]
    NonpositiveAlpha,
    #[error("claim {claim} requires {required} function, {function} is {actual}")]
    WrongConvexityClass {
        claim: String,
        function: String,
        required: String,
        actual: String,
    },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("tuple must contain at least {min} elements, got {actual}")]
    TupleTooShort { min: usize, actual: usize },
    #[error("unknown claim id `{0}`")]
    UnknownClaimId(String),
    #[error("unknown function id `{0}`")]
    UnknownFunctionId(String),
    #[error("unknown identity id `{0}`")]
    UnknownIdentityId(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
