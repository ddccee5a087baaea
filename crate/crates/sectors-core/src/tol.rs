//! Centralized numerical tolerances.
//!
//! Every threshold used by the library lives here so that acceptance
//! checks and unit tests pin the same values as the implementation.

/// Homomorphism / unitarity residual allowed for a unitary representation.
pub const REP: f64 = 1e-9;

/// Residual allowed when rounding a multiplicity or dimension to an integer.
pub const INT_ROUND: f64 = 1e-6;

/// Span-closure residual for matrix *-algebras (products and adjoints of
/// basis elements must lie in the span up to this).
pub const ALGEBRA: f64 = 1e-9;

/// Singular-value cutoff deciding kernel membership, relative to the
/// largest singular value (floored at 1).
pub const SV_CUTOFF: f64 = 1e-9;

/// Eigenvalue clustering tolerance (relative) for spectral decompositions.
pub const EIG_CLUSTER: f64 = 1e-9;

/// Minimum eigenvalue allowed for a positive-semidefinite density matrix.
pub const PSD: f64 = -1e-10;

/// Trace-normalization slack for states.
pub const TRACE_NORM: f64 = 1e-10;

/// Reconstruction error allowed for central decompositions of states.
pub const CENTRAL_DECOMP: f64 = 1e-10;

/// Residual for conditional-expectation and fixed-point identities.
pub const COND_EXP: f64 = 1e-10;

/// Isotypic projections: completeness and orthogonality residual.
pub const ISOTYPIC: f64 = 1e-10;

/// Character-orthogonality residual.
pub const CHAR_ORTHO: f64 = 1e-9;

/// Crossed-product representation compatibility with equivariance.
pub const CRSS_COMPAT: f64 = 1e-12;

/// Covariance residual for the induced covariant pair.
pub const COVARIANCE: f64 = 1e-10;

/// Coset-independence of the sector channel on group-invariant arguments.
pub const PSI_INVARIANCE: f64 = 1e-12;

/// Round-trip error allowed for the order-parameter readout.
pub const READOUT: f64 = 1e-8;

/// Measurement-scheme residual (pointer records the spectral measure).
pub const SCHEME: f64 = 1e-12;

/// Instrument normalization residual: J(Spec|ω)(1) = 1.
pub const INSTRUMENT_NORM: f64 = 1e-10;

/// Outcome-distribution normalization residual.
pub const PROB_NORM: f64 = 1e-12;

/// Repeatability: posterior must reproduce its outcome up to this.
pub const REPEATABLE: f64 = 1e-10;

/// Default trace-distance tolerance for reachability verdicts.
pub const REACH: f64 = 1e-8;
