use thiserror::Error;

/// Errors shared by every module. The CLI maps these to exit codes:
/// precision exhaustion (and unresolved ambiguity) → 2, invalid inputs and
/// infeasible requests → 3.
#[derive(Debug, Error)]
pub enum Error {
    /// Deepening a truncation can no longer help: the exponent rule is
    /// exhausted, a term would exceed the bit budget, or the depth cap was hit.
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    /// A nearest-integer distance could not be pinned down even at the depth
    /// cap (the enclosure straddles a decision boundary).
    #[error("ambiguous distance: {0}")]
    AmbiguousDistance(String),

    /// Some ζʲ·x is exactly an integer (rational ζ only). Callers that scan
    /// must treat these separately per the nonvanishing convention.
    #[error("exact hit: ζ^{j}·{x} is an integer")]
    ExactHit { j: u32, x: String },

    /// A documented operation precondition does not hold for the input.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Malformed construction parameters (base, coefficient, exponent rule).
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    /// An exhaustive enumeration would exceed the configured cap.
    #[error("box too large: {boxes} enumeration points exceed cap {cap}")]
    BoxTooLarge { boxes: String, cap: u64 },

    /// No closed-form result covers the requested parameter combination.
    #[error("no applicable result: {0}")]
    NoApplicableResult(String),

    /// A certified internal invariant failed; indicates a bug, not bad input.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
