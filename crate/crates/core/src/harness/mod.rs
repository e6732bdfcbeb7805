//! ε-sweeps of the oscillating Dirichlet problem, rate fitting and the
//! theoretical exponents the measured rates are compared against.
//!
//! The homogenized solution is the constant `ḡ` (the torus mean of `g`):
//! constants solve `−div(A∇u) = 0`, so no second solve is needed.

mod fit;
mod rates;
mod sweep;

use thiserror::Error;

use crate::fem::FemError;
use crate::geometry::GeometryError;

pub use fit::{fit_rate, RateFit, PREASYMPTOTIC_FACTOR};
pub use rates::{theoretical_rates, TheoreticalRates};
pub use sweep::{
    optimality_check, pointwise_envelope, probe_points_on_face, rate_report, run_sweep,
    EpsilonRecord, LpFit, Optimality, PointwiseEnvelope, ProbePoint, RateReport, SweepConfig,
    SweepResult, OPTIMALITY_TOL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("invalid sweep configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Fem(#[from] FemError),
}
