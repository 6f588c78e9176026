//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point {point:?} lies outside the chart domain of {chart}")]
    PointOutsideChart { chart: String, point: Vec<f64> },

    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("metric is numerically singular (condition estimate {condition:.3e} exceeds {limit:.1e})")]
    SingularMetric { condition: f64, limit: f64 },

    #[error("metric is not positive definite at the evaluation point")]
    NotPositiveDefinite,

    #[error("radius {r} reaches past the injectivity bound {bound:.6} of the model")]
    RadiusBeyondInjectivity { r: f64, bound: f64 },

    #[error("conjugate point encountered near t = {t:.6}; volume density is invalid beyond it")]
    ConjugatePoint { t: f64 },

    #[error("geodesic left the chart near t = {t:.6}")]
    ChartExit { t: f64 },

    #[error("integrator failed near t = {t:.6}: {detail}")]
    OdeStepFailure { t: f64, detail: String },

    #[error("direction quadrature has not converged: error estimate {estimate:.3e} exceeds budget {budget:.3e}")]
    QuadratureNotConverged { estimate: f64, budget: f64 },

    #[error("least-squares fit is ill-conditioned (condition number {condition:.3e})")]
    IllConditionedFit { condition: f64 },

    #[error("chart of {chart} does not cover a closed manifold; global integrals are undefined")]
    NonCoveringChart { chart: String },

    #[error("manifest line {line}: {message}")]
    ManifestParse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
