use thiserror::Error;

use crate::solver::PeriodicWave;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular point: {0}")]
    Singularity(String),

    #[error("quadrature reached {achieved:e}, requested {requested:e}")]
    Accuracy { requested: f64, achieved: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("Newton iteration stopped after {iterations} iterations with residual {residual:e}")]
    Divergence {
        iterations: usize,
        residual: f64,
        last: Box<PeriodicWave>,
    },

    #[error("Jacobian is numerically singular (pivot ratio {pivot_ratio:e})")]
    SingularJacobian { pivot_ratio: f64 },

    #[error("continuation stalled before lambda = {target}; last converged lambda = {last_good}")]
    ContinuationStall { target: f64, last_good: f64 },

    #[error("period sweep did not converge: {0}")]
    SweepNotConverged(Box<crate::solitary::SweepRecord>),

    #[error("solitary wave construction failed: {0}")]
    Construction(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("document format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}
