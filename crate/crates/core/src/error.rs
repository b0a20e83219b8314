use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the phase pipeline.
///
/// Variants carry enough context to say *where* along the loop a failure
/// happened, since most of them are resolution problems the caller can fix
/// by increasing the sample count.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operator is not Hermitian: defect {defect:e} exceeds tolerance {tolerance:e}")]
    NonHermitianInput { defect: f64, tolerance: f64 },

    #[error("cannot take the argument of a complex number with magnitude {magnitude:e}")]
    ZeroMagnitude { magnitude: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("eigenvalue gap {gap:e} at s = {s} is below the gap threshold {threshold:e}")]
    GapCollapse { s: f64, gap: f64, threshold: f64 },

    #[error(
        "ambiguous level continuation at step {step}: best overlap {overlap:.6} < {threshold}; \
         increase the number of loop samples (n_time)"
    )]
    StepAmbiguity {
        step: usize,
        overlap: f64,
        threshold: f64,
    },

    #[error("path does not close: |<psi_N|psi_0>| = {overlap:.6} < {threshold}")]
    OpenPath { overlap: f64, threshold: f64 },

    #[error("overlap between samples {step} and {next} vanishes ({magnitude:e})")]
    ZeroOverlap {
        step: usize,
        next: usize,
        magnitude: f64,
    },

    #[error(
        "per-step phase {arg:.6} at step {step} is too large for an unambiguous unwrap; \
         increase the number of loop samples (n_time)"
    )]
    StepTooCoarse { step: usize, arg: f64 },

    #[error("Schmidt weights are degenerate at sample {step} (|p1 - p2| = {splitting:e})")]
    SchmidtDegenerate { step: usize, splitting: f64 },

    #[error(
        "Schmidt branch {branch} of subsystem {subsystem} does not close: overlap {overlap:.6}"
    )]
    NonCyclicBranch {
        branch: usize,
        subsystem: &'static str,
        overlap: f64,
    },

    #[error("Schmidt weights drift by {drift:e} along the loop (limit {limit:e})")]
    WeightDrift { drift: f64, limit: f64 },

    #[error("resultant of the weighted phase factors vanishes (|sum| = {magnitude:e})")]
    VanishingResultant { magnitude: f64 },

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// Stable short name, used as the status column of sweep output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonHermitianInput { .. } => "NonHermitianInput",
            Error::ZeroMagnitude { .. } => "ZeroMagnitude",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::GapCollapse { .. } => "GapCollapse",
            Error::StepAmbiguity { .. } => "StepAmbiguity",
            Error::OpenPath { .. } => "OpenPath",
            Error::ZeroOverlap { .. } => "ZeroOverlap",
            Error::StepTooCoarse { .. } => "StepTooCoarse",
            Error::SchmidtDegenerate { .. } => "SchmidtDegenerate",
            Error::NonCyclicBranch { .. } => "NonCyclicBranch",
            Error::WeightDrift { .. } => "WeightDrift",
            Error::VanishingResultant { .. } => "VanishingResultant",
            Error::Io { .. } => "Io",
        }
    }
}
