use serde::Serialize;

use crate::geometry::planar::P2;
use crate::geometry::{lattice_partition, ConvexPolytope, Face, FaceShape};
use crate::periodic::PeriodicFunction;
use crate::Complex64;

use super::{
    patch_integral_closed_form, polygon_integral, FacePatch, OscError, QuadratureBudget,
};

/// Cells per face diameter used to partition 3-D faces.
const CELLS_PER_DIAMETER: f64 = 8.0;

fn axis_of_largest_component(normal: &[f64]) -> usize {
    let mut k = 0;
    for (i, v) in normal.iter().enumerate() {
        if v.abs() > normal[k].abs() {
            k = i;
        }
    }
    k
}

/// Sum of `c_m I_λ(m)` over the support of `g`.
fn weighted_integral(patch: &FacePatch, g: &PeriodicFunction, lambda: f64) -> Result<Complex64, OscError> {
    let mut s = Complex64::default();
    for (m, c) in g.coefficients() {
        s += c * patch_integral_closed_form(patch, lambda, m)?.value;
    }
    Ok(s)
}

/// `(1/H^{d−1}(Π)) ∫_Π g(λy) dσ(y)`.
///
/// For `d = 2` the face is a single patch and the result is exact. For
/// `d = 3` the face is split by a lattice partition; cells use the closed
/// form and the leftover near the face boundary is integrated numerically.
pub fn face_average(face: &Face, g: &PeriodicFunction, lambda: f64) -> Result<Complex64, OscError> {
    if g.dim() != face.dim() {
        return Err(OscError::DimensionMismatch {
            expected: face.dim(),
            found: g.dim(),
        });
    }
    match &face.shape {
        FaceShape::Segment { .. } => {
            let patch = FacePatch::from_segment_face(face)?;
            Ok(weighted_integral(&patch, g, lambda)? / super::patch_measure(&patch))
        }
        FaceShape::Polygon { .. } => face_average_3d(face, g, lambda),
        FaceShape::Implicit => Err(OscError::UnsupportedDimension(face.dim())),
    }
}

fn face_average_3d(face: &Face, g: &PeriodicFunction, lambda: f64) -> Result<Complex64, OscError> {
    let k = axis_of_largest_component(&face.normal);
    let diam = face.diameter().unwrap_or(1.0);
    let part = lattice_partition(face, k, diam / CELLS_PER_DIAMETER)?;
    let mut total = Complex64::default();
    for cell in &part.cells {
        let bounds = cell
            .lower
            .iter()
            .zip(&cell.upper)
            .map(|(&a, &b)| (a, b))
            .collect();
        let patch = FacePatch::new(face.normal.clone(), face.offset, k, bounds)?;
        total += weighted_integral(&patch, g, lambda)?;
    }
    let tol = 1e-12 * part.face_measure;
    for piece in &part.leftover {
        let poly: Vec<P2> = piece.projected.iter().map(|p| [p[0], p[1]]).collect();
        let mut bounds = [(f64::INFINITY, f64::NEG_INFINITY); 2];
        for p in &poly {
            for t in 0..2 {
                bounds[t].0 = bounds[t].0.min(p[t]);
                bounds[t].1 = bounds[t].1.max(p[t]);
            }
        }
        let lift = FacePatch::new(face.normal.clone(), face.offset, k, bounds.to_vec())?;
        for (m, c) in g.coefficients() {
            let v = polygon_integral(&lift, &poly, lambda, m, tol, QuadratureBudget::default())?;
            total += c * v.value;
        }
    }
    Ok(total / part.face_measure)
}

/// Measure-weighted average of [`face_average`] over all faces, i.e.
/// `(1/H^{d−1}(∂D)) ∫_{∂D} g(λy) dσ(y)`.
pub fn boundary_average(
    poly: &ConvexPolytope,
    g: &PeriodicFunction,
    lambda: f64,
) -> Result<Complex64, OscError> {
    let mut num = Complex64::default();
    let mut den = 0.0;
    for face in poly.faces() {
        let meas = face
            .measure()
            .ok_or(OscError::UnsupportedDimension(poly.dim()))?;
        num += face_average(face, g, lambda)? * meas;
        den += meas;
    }
    Ok(num / den)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquiRow {
    pub lambda: f64,
    pub value: Complex64,
    /// `|average − ḡ|`.
    pub deviation: f64,
    /// `λ·|average − ḡ|`.
    pub scaled: f64,
}

/// Boundary (or single-face, when `face` is given) averages along a grid of
/// frequencies, with deviations from the torus mean.
pub fn equidistribution_table(
    poly: &ConvexPolytope,
    g: &PeriodicFunction,
    lambdas: &[f64],
    face: Option<usize>,
) -> Result<Vec<EquiRow>, OscError> {
    let target = match face {
        Some(i) => Some(poly.face(i).ok_or_else(|| {
            OscError::InvalidParameter(format!("half-space {i} has no face"))
        })?),
        None => None,
    };
    let mean = g.mean();
    lambdas
        .iter()
        .map(|&lambda| {
            let value = match target {
                Some(f) => face_average(f, g, lambda)?,
                None => boundary_average(poly, g, lambda)?,
            };
            let deviation = (value - mean).norm();
            Ok(EquiRow {
                lambda,
                value,
                deviation,
                scaled: lambda * deviation,
            })
        })
        .collect()
}
