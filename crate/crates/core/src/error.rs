use thiserror::Error;

use crate::fem::FemError;
use crate::geometry::GeometryError;
use crate::harness::HarnessError;
use crate::oscillatory::OscError;
use crate::periodic::PeriodicError;

/// Crate-level error wrapping the per-module error types.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Periodic(#[from] PeriodicError),
    #[error(transparent)]
    Oscillatory(#[from] OscError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    /// True for failures of a numerical procedure (non-convergence, budget
    /// exhaustion) as opposed to invalid input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Fem(e) => e.is_numerical(),
            Error::Oscillatory(OscError::BudgetExceeded { .. }) => true,
            Error::Harness(HarnessError::DegenerateFit(_)) => true,
            _ => false,
        }
    }
}
