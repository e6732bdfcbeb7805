//! Oscillatory integrals `∫_Π e^{2πiλ m·y} dσ(y)` over flat face patches.
//!
//! A [`FacePatch`] is the part of the hyperplane `ν·y = c` lying over an
//! axis-aligned box in the coordinates other than the eliminated axis `k`.
//! On such a patch the phase is affine in the remaining coordinates, so the
//! integral factorizes into one-dimensional exponential integrals; see
//! [`patch_integral_closed_form`]. [`patch_integral_quadrature`] evaluates
//! the same integral by brute-force tensor Gauss quadrature and serves as the
//! oracle for the closed form.

mod average;
mod envelope;
mod patch;
mod quadrature;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::GeometryError;
use crate::Complex64;

pub use average::{boundary_average, equidistribution_table, face_average, EquiRow};
pub use envelope::{decay_envelope, DecayEnvelope, EnvelopeRow};
pub use patch::{patch_integral_closed_form, patch_measure, FacePatch};
pub use quadrature::{
    gauss_legendre, patch_integral_quadrature, polygon_integral, QuadratureBudget,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OscError {
    #[error("invalid patch: {0}")]
    InvalidPatch(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("quadrature budget exceeded: {needed} panels requested, cap {cap}")]
    BudgetExceeded { needed: u64, cap: u64 },
    #[error("operation not supported in dimension {0}")]
    UnsupportedDimension(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OscMethod {
    ClosedForm,
    Quadrature,
}

/// One evaluation of `I_λ(m)` together with how it was obtained.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscValue {
    pub value: Complex64,
    pub lambda: f64,
    pub m: Vec<i64>,
    pub method: OscMethod,
    /// Estimated absolute error (zero for the closed form).
    pub error_estimate: f64,
}

/// `e^{2πi t}` with `t` reduced modulo 1 first.
pub(crate) fn unit_phase(t: f64) -> Complex64 {
    let frac = t - t.round();
    let (s, c) = (2.0 * std::f64::consts::PI * frac).sin_cos();
    Complex64::new(c, s)
}
