use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("non-evaluable region: {0}")]
    NonEvaluable(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("operator not positive definite (curvature {0:e})")]
    NotPositiveDefinite(f64),
    #[error("numerical divergence: {0}")]
    NumericalDivergence(String),
    #[error("spectrum not resolved after {0} QR iterations")]
    SpectrumNotResolved(usize),
    #[error("follower Hessian singular")]
    SingularFollowerHessian,
    #[error("not a critical point (gradient norm {0:e})")]
    NotCritical(f64),
    #[error("not a strict local minimax: {0}")]
    NotStrictMinimax(String),
    #[error("rectangular bound inapplicable: epsilon {epsilon} exceeds rho_xy {rho_xy}")]
    RectangularBoundInapplicable { epsilon: f64, rho_xy: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dense Hessian blocks unavailable for this problem")]
    HessianUnavailable,
}

pub type Result<T> = std::result::Result<T, Error>;
