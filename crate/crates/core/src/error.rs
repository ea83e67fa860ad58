use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("x = {x} lies outside the tabulated range [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },

    #[error("step profile has no derivative at the interface x = 0")]
    StepSingularity,

    /// Electric coupling at or beyond the critical strength.
    #[error("electric coupling |kappa_v| = {kappa_v} is not below the critical field {critical}")]
    CriticalField { kappa_v: f64, critical: f64 },

    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(String),

    #[error("parameter constraint violated: {0}")]
    Constraint(String),

    #[error("construction failed: {reason}")]
    ConstructionFailed { reason: String, spectrum: Vec<f64> },

    /// The first-order operator annihilated the trial spinor.
    #[error("reconstructed spinor vanishes identically; use the direct zero-mode construction")]
    ZeroOutput,

    #[error("eigensolver did not converge after {iterations} iterations: {detail}")]
    NoConvergence { iterations: usize, detail: String },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
}
