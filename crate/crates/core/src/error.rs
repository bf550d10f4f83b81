//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by state construction, optical transformations, detection,
/// classification, and reconstruction.
#[derive(Debug, Error)]
pub enum SimError {
    /// A mode layout was declared with duplicate or empty identifiers.
    #[error("invalid mode layout: {0}")]
    InvalidLayout(String),
    /// Two layouts being combined share a spatial label.
    #[error("spatial label collision: {0:?} appears in both layouts")]
    LabelCollision(String),
    /// An operation referenced a mode that the layout does not contain.
    #[error("unknown mode: {0}")]
    UnknownMode(String),
    /// Adding a photon would push a term past the layout's total cutoff.
    #[error("photon-number cutoff exceeded: term would hold {total} photons, cutoff is {cutoff}")]
    CutoffExceeded { total: u32, cutoff: u32 },
    /// A matrix expected to be unitary failed the unitarity check.
    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    /// A state or matrix failed a normalization requirement.
    #[error("normalization violated: {0}")]
    NotNormalized(String),
    /// A parameter was outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// Amplitude mass discarded by the cutoff exceeded the diagnostic bound.
    #[error("truncation diagnostic: discarded weight {weight:.3e} exceeds the bound {bound:.3e}; raise the cutoff or the bound")]
    TruncationExceeded { weight: f64, bound: f64 },
    /// Detector groups and kept modes do not cover the layout exactly.
    #[error("detector coverage error: {0}")]
    DetectorCoverage(String),
    /// A projection or reduction conditioned on an empty subspace.
    #[error("empty subspace: {0}")]
    EmptySubspace(String),
    /// A click pattern does not match the classification table's geometry.
    #[error("pattern mismatch: {0}")]
    PatternMismatch(String),
    /// A density or process matrix failed a physicality check.
    #[error("not a physical state: {0}")]
    NotPhysical(String),
    /// The correction table has no entry for the requested outcome.
    #[error("no Pauli correction defined for outcome {0}")]
    NoCorrection(String),
    /// An acceptance ratio was requested with an empty denominator.
    #[error("acceptance probability undefined: no accepted events")]
    EmptyAcceptance,
    /// Iterative reconstruction failed to converge within its iteration cap.
    #[error("tomography failed to converge after {iterations} iterations (last gain {last_gain:.3e})")]
    NoConvergence { iterations: usize, last_gain: f64 },
    /// Count records were missing or inconsistent.
    #[error("invalid count records: {0}")]
    InvalidCounts(String),
    /// Table serialization or deserialization failed.
    #[error("table serialization: {0}")]
    TableFormat(String),
}

/// Convenience alias used by every fallible operation in the crate.
pub type SimResult<T> = Result<T, SimError>;
