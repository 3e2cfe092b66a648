//! Error type shared by every module of the solver.
//!
//! Each variant corresponds to one failure mode that a caller can act on:
//! a bad parameter set, a geometric obstruction (no horizon pair, extremal
//! horizon), a spectral obstruction (σ on a critical strip), or a numerical
//! guard (a determinant that is indistinguishable from zero on a contour).

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, QnmError>;

/// All recoverable failures of the resonance pipeline.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum QnmError {
    /// A physical or numerical parameter is outside its documented range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    /// The horizon function has no pair of simple positive roots bounding a
    /// region where it is positive.
    #[error("no horizon pair: {0}")]
    NoHorizonPair(String),

    /// One of the selected horizons is (numerically) a multiple root.
    #[error("degenerate horizon at r = {r}: |dμ/dr| = {derivative:e} below tolerance {tolerance:e}")]
    DegenerateRoot { r: f64, derivative: f64, tolerance: f64 },

    /// Ω > 0 or κ > 0 fails somewhere on [r₋, r₊] × [0, π].
    #[error("assumption `{which}` violated: minimum {minimum:e} at r = {r}, θ = {theta}")]
    AssumptionViolated { which: String, minimum: f64, r: f64, theta: f64 },

    /// A point was evaluated outside the validity region of its chart.
    #[error("chart domain error: {0}")]
    ChartDomainError(String),

    /// A discretization is too coarse for the requested operation.
    #[error("resolution error: {0}")]
    ResolutionError(String),

    /// A falling factorial hit one of its zeros.
    #[error("pole of F_(k,l): i·ξ + k + l = {z_re} + {z_im}i is within tolerance of an integer in 0..{k}")]
    PoleError { z_re: f64, z_im: f64, k: u32 },

    /// Mellin transform tail mass above the documented threshold.
    #[error("Mellin spectrum aliasing: tail mass {tail_mass:e} exceeds {threshold:e}")]
    AliasWarning { tail_mass: f64, threshold: f64 },

    /// Symbol decay insufficient for the dual-grid extent.
    #[error("symbol truncation: estimated tail {tail:e} exceeds {threshold:e}")]
    TruncationWarning { tail: f64, threshold: f64 },

    /// σ sits (within tolerance) on a critical strip.
    #[error("σ = {sigma_re} + {sigma_im}i is on the critical strip of order j = {j} at the {horizon} horizon (min |𝔭| = {min_value:e})")]
    StripError { sigma_re: f64, sigma_im: f64, j: u32, horizon: String, min_value: f64 },

    /// The (N, N′) depth pair violates the trace-class constraints.
    #[error("mode error: {0}")]
    ModeError(String),

    /// LU factorization met an exactly singular pivot.
    #[error("singular LU factorization")]
    SingularLU,

    /// |D_R| on a contour node is below the guard threshold.
    #[error("|D_R| = {value:e} at σ = {sigma_re} + {sigma_im}i is below the guard {threshold:e}; move the contour")]
    NearZeroOnContour { sigma_re: f64, sigma_im: f64, value: f64, threshold: f64 },

    /// The denominator of the count error constant is not positive.
    #[error("error budget blow-up: min |D_R| = {min_det:e} ≤ max 𝔇_R = {max_dfrak:e}")]
    BudgetBlowup { min_det: f64, max_dfrak: f64 },

    /// Quadrisection did not isolate single zeros within the depth limit.
    #[error("subdivision depth {0} exceeded")]
    DepthExceeded(usize),

    /// A subdivision cell would straddle a critical strip.
    #[error("cell crosses the critical strip Im σ = {strip}")]
    StripCollision { strip: f64 },

    /// The Jost-solution matching point is not deep enough in the tail.
    #[error("potential tail {tail:e} at x = {x} exceeds tolerance {tolerance:e}")]
    TailError { x: f64, tail: f64, tolerance: f64 },

    /// Configuration could not be parsed or validated.
    #[error("configuration error: {0}")]
    Config(String),
}

impl QnmError {
    /// Convenience constructor for [`QnmError::InvalidParameter`].
    pub fn invalid(name: &str, reason: impl Into<String>) -> Self {
        QnmError::InvalidParameter { name: name.to_string(), reason: reason.into() }
    }

    /// Short machine-readable tag of the variant, used in error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            QnmError::InvalidParameter { .. } => "InvalidParameter",
            QnmError::NoHorizonPair(_) => "NoHorizonPair",
            QnmError::DegenerateRoot { .. } => "DegenerateRoot",
            QnmError::AssumptionViolated { .. } => "AssumptionViolated",
            QnmError::ChartDomainError(_) => "ChartDomainError",
            QnmError::ResolutionError(_) => "ResolutionError",
            QnmError::PoleError { .. } => "PoleError",
            QnmError::AliasWarning { .. } => "AliasWarning",
            QnmError::TruncationWarning { .. } => "TruncationWarning",
            QnmError::StripError { .. } => "StripError",
            QnmError::ModeError(_) => "ModeError",
            QnmError::SingularLU => "SingularLU",
            QnmError::NearZeroOnContour { .. } => "NearZeroOnContour",
            QnmError::BudgetBlowup { .. } => "BudgetBlowup",
            QnmError::DepthExceeded(_) => "DepthExceeded",
            QnmError::StripCollision { .. } => "StripCollision",
            QnmError::TailError { .. } => "TailError",
            QnmError::Config(_) => "Config",
        }
    }
}
