//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by solvers, samplers and bound evaluators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("spectrum enumeration would exceed the entry limit {limit} (needs {needed})")]
    SpectrumTooLarge { limit: usize, needed: usize },

    #[error("cutoff too small: certified tail {tail:e} exceeds requested tolerance {tol:e}")]
    CutoffTooSmall { tail: f64, tol: f64 },

    #[error("adaptive quadrature failed to converge (depth limit reached on [{a}, {b}])")]
    QuadratureNonconvergence { a: f64, b: f64 },

    #[error("invalid point for {space}: {reason}")]
    InvalidPoint { space: String, reason: String },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("declared lower mass constant {declared} violated: density {found} at grid point {at}")]
    LowerMassViolated { declared: f64, found: f64, at: f64 },

    #[error("rejection sampler stalled: acceptance rate {rate:e} below 1e-3")]
    RejectionStall { rate: f64 },

    #[error("unsupported process for this operation: {0}")]
    UnsupportedProcess(String),

    #[error("unsupported measure for this operation: {0}")]
    UnsupportedMeasure(String),

    #[error("transport instance infeasible: weight sums differ by {0:e}")]
    Infeasible(f64),

    #[error("solver budget exceeded: instance needs {needed} arcs, budget is {budget}")]
    BudgetExceeded { needed: usize, budget: usize },

    #[error("network simplex failed to terminate within the iteration cap")]
    SimplexStalled,

    #[error("optimality certificate failed: {0}")]
    CertificateFailed(String),

    #[error("operation requires the circle: got {0}")]
    NotCircle(String),

    #[error("spectral gap constant must be positive, got {0}")]
    NonPositiveGap(f64),

    #[error("p = {0} does not qualify: need a prime p = 1 mod 4")]
    BadLpsPrime(u64),

    #[error("lower mass constant is 0 and the spectral term is nonzero; no t-uniform heat kernel lower bound is configured")]
    ZeroLowerMass,

    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
