use thiserror::Error;

/// Errors shared by every module of the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("boundary gap must be positive, got a = {0}")]
    NonPositiveGap(f64),
    #[error("boundary is not convex: f''({t}) = {value}")]
    NonConvexBoundary { t: f64, value: f64 },
    #[error("invalid boundary specification: {0}")]
    InvalidBoundarySpec(String),
    #[error("t = {0} is beyond the tabulated range [0, {1}]")]
    OutOfTabulatedRange(f64, f64),
    #[error("quadrature did not converge on [{a}, {b}] to tolerance {tol}")]
    QuadratureFailure { a: f64, b: f64, tol: f64 },
    #[error("argument outside the function domain: {0}")]
    DomainError(String),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("implicit solve failed to converge: {0}")]
    NonConvergence(String),
    #[error("delta initial condition under-resolved: mass defect {0} exceeds 1e-3")]
    DeltaApproximationError(f64),
    #[error("boundary is degenerate: f(0) = {0} <= 0")]
    DegenerateBoundary(f64),
    #[error("field is not strictly positive at a required node (value {0})")]
    NonPositiveField(f64),
    #[error("identity check failed: {0}")]
    IdentityCheckFailed(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
