//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("group load error: {0}")]
    GroupLoad(String),

    #[error("associativity fails at triple ({a}, {b}, {c}): ({a}*{b})*{c} != {a}*({b}*{c})")]
    NonAssociative { a: usize, b: usize, c: usize },

    #[error("element {0} has no two-sided inverse")]
    MissingInverse(usize),

    #[error("no two-sided identity element")]
    MissingIdentity,

    #[error("subgroup '{label}' is not closed: {reason}")]
    NotASubgroup { label: String, reason: String },

    #[error("representation invariant violated: {0}")]
    RepInvariant(String),

    #[error("eigenvalue clustering failed: {context} (residual {residual:.3e})")]
    Clustering { context: String, residual: f64 },

    #[error("non-integer multiplicity {value} for {context} (residual {residual:.3e})")]
    NonIntegerMultiplicity {
        context: String,
        value: f64,
        residual: f64,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("algebra invariant violated: {0}")]
    AlgebraInvariant(String),

    #[error("state invariant violated: {0}")]
    StateInvariant(String),

    #[error("element is not in the span of the algebra (residual {0:.3e})")]
    NotInSpan(f64),

    #[error("equivariance violated at coset {coset}: residual {residual:.3e}")]
    Equivariance { coset: usize, residual: f64 },

    #[error("irrep '{0}' does not occur in the chosen representation")]
    AbsentIrrep(String),

    #[error("gluing constraint violated for charge '{gamma}': components {values:?}")]
    GluingViolation { gamma: String, values: Vec<f64> },

    #[error("observable is not self-adjoint (residual {0:.3e})")]
    NotSelfAdjoint(f64),

    #[error("function undefined on spectral point {0}")]
    UndefinedOnSpectrum(f64),

    #[error("outcome {0} has probability {1:.3e}; posterior undefined")]
    ZeroProbabilityOutcome(usize, f64),

    #[error("not a probability weight: {0}")]
    BadWeights(String),

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
