use thiserror::Error;

/// Errors raised by the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge: estimated error {achieved:e} exceeds requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    /// An iterative solver ran out of iterations.
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// Root bracketing failed.
    #[error("no sign change found while bracketing: {0}")]
    Bracket(String),

    /// The operation assumes the delocalized variational solution.
    #[error("localized phase (eta = {eta:e}): operation requires a delocalized solution")]
    Localized { eta: f64 },

    /// A brute-force problem exceeded the configured size limit.
    #[error("sector dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    /// Time grid too coarse for the amplitude solver.
    #[error("time step too coarse: {0}")]
    StepSize(String),
}

pub type Result<T> = std::result::Result<T, Error>;
