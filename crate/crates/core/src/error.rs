use thiserror::Error;

/// Errors raised by the numeric modules.
///
/// Parse failures of `.wvx` text have their own positioned type,
/// [`crate::wvxfmt::ParseError`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("all amplitudes vanish; cannot normalize a zero vector")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("degenerate overlap: |<post|pre>| = {overlap:e} is below the cutoff")]
    DegenerateOverlap { overlap: f64 },
    #[error("invalid observable: {0}")]
    InvalidObservable(String),
    #[error("path index {index} is out of range for dimension {dim}")]
    PathOutOfRange { index: usize, dim: usize },
    #[error("invalid component: {0}")]
    InvalidComponent(String),
    #[error("first-order expansion requires |theta|, |alpha| < 1 (path {path}: theta = {theta}, alpha = {alpha})")]
    OutsideFirstOrderDomain { path: usize, theta: f64, alpha: f64 },
    #[error("internal route mismatch: {left} vs {right}")]
    RouteMismatch { left: f64, right: f64 },
    #[error("alpha must be positive, got {0}")]
    NonpositiveAlpha(f64),
    #[error("theta must be nonzero")]
    ZeroTheta,
    #[error("baseline probability must be positive, got {0}")]
    ZeroBaseline(f64),
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error("grid overflow: {0}")]
    GridOverflow(String),
    #[error("measurement strength {0} is outside [0, 1]")]
    StrengthOutOfRange(f64),
    #[error("invalid meter amplitudes: {0}")]
    InvalidMeter(String),
    #[error("post-selection has zero probability")]
    ImpossiblePostselection,
    #[error("measurement strength is zero; the normalized readout is undefined")]
    ZeroStrength,
    #[error("poisson mean must be finite and nonnegative, got {0}")]
    NegativeMean(f64),
    #[error("baseline post-selection probability is zero")]
    DegenerateBaseline,
    #[error("invalid experiment name: {0}")]
    InvalidName(String),
    #[error("invalid counting plan: {0}")]
    InvalidPlan(String),
}

pub type Result<T> = std::result::Result<T, Error>;
