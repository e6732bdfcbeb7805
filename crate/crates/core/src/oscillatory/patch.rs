use std::f64::consts::PI;

use crate::geometry::{Face, FaceShape, GEOM_TOL};
use crate::Complex64;

use super::{unit_phase, OscError, OscMethod, OscValue};

/// `{y : ν·y = c, y_j ∈ [a_j, b_j] for j ≠ k}` with unit `ν` and `ν_k ≠ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct FacePatch {
    normal: Vec<f64>,
    offset: f64,
    axis: usize,
    /// Bounds for the coordinates `j ≠ k`, in increasing `j`.
    bounds: Vec<(f64, f64)>,
}

impl FacePatch {
    pub fn new(
        normal: Vec<f64>,
        offset: f64,
        axis: usize,
        bounds: Vec<(f64, f64)>,
    ) -> Result<Self, OscError> {
        let d = normal.len();
        if d < 2 {
            return Err(OscError::InvalidPatch(format!("dimension {d} below 2")));
        }
        let n: f64 = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return Err(OscError::InvalidPatch(format!("normal has norm {n}")));
        }
        if axis >= d {
            return Err(OscError::InvalidPatch(format!("axis {axis} out of range")));
        }
        if normal[axis].abs() <= GEOM_TOL {
            return Err(OscError::InvalidPatch(format!(
                "normal component {axis} vanishes"
            )));
        }
        if bounds.len() != d - 1 {
            return Err(OscError::DimensionMismatch {
                expected: d - 1,
                found: bounds.len(),
            });
        }
        if let Some((a, b)) = bounds.iter().find(|(a, b)| !(a < b)) {
            return Err(OscError::InvalidPatch(format!("empty interval [{a}, {b}]")));
        }
        Ok(Self {
            normal,
            offset,
            axis,
            bounds,
        })
    }

    /// The whole face of a polygon as a single patch, eliminating the axis
    /// with the largest normal component.
    pub fn from_segment_face(face: &Face) -> Result<Self, OscError> {
        let FaceShape::Segment { start, end } = face.shape else {
            return Err(OscError::UnsupportedDimension(face.dim()));
        };
        let axis = if face.normal[0].abs() > face.normal[1].abs() {
            0
        } else {
            1
        };
        let j = 1 - axis;
        let (a, b) = (start[j].min(end[j]), start[j].max(end[j]));
        Self::new(face.normal.clone(), face.offset, axis, vec![(a, b)])
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn axis(&self) -> usize {
        self.axis
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// Ambient coordinate indices matching [`bounds`](Self::bounds).
    pub fn free_axes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim()).filter(move |&j| j != self.axis)
    }

    /// Lifts free coordinates onto the hyperplane.
    pub fn lift(&self, free: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        let mut rest = self.offset;
        for (j, &v) in self.free_axes().zip(free) {
            y[j] = v;
            rest -= self.normal[j] * v;
        }
        y[self.axis] = rest / self.normal[self.axis];
        y
    }

    /// Splits the box at `t` along free coordinate `slot` (an index into
    /// [`bounds`](Self::bounds)).
    pub fn split(&self, slot: usize, t: f64) -> Result<(Self, Self), OscError> {
        let (a, b) = self.bounds[slot];
        if !(a < t && t < b) {
            return Err(OscError::InvalidParameter(format!(
                "split point {t} outside ({a}, {b})"
            )));
        }
        let mut left = self.clone();
        let mut right = self.clone();
        left.bounds[slot].1 = t;
        right.bounds[slot].0 = t;
        Ok((left, right))
    }
}

/// `H^{d−1}(Π) = ∏_{j≠k}(b_j − a_j) / |ν_k|`.
pub fn patch_measure(patch: &FacePatch) -> f64 {
    patch.bounds.iter().map(|(a, b)| b - a).product::<f64>() / patch.normal[patch.axis].abs()
}

/// Closed form of `I_λ(m) = ∫_Π e^{2πiλ m·y} dσ(y)`.
///
/// Substituting `y_k = (c − Σ_{j≠k} ν_j y_j)/ν_k` gives
/// `I_λ = |ν_k|^{-1} e^{2πiλ c m_k/ν_k} ∏_{j≠k} ∫_{a_j}^{b_j} e^{2πiλθ_j t} dt`
/// with `θ_j = m_j − m_k ν_j/ν_k`. Each factor is written as
/// `e^{iπx(a+b)} sin(πx(b−a))/(πx)`, `x = λθ_j`, which equals the usual
/// difference quotient but is exactly conjugation-symmetric in `m`.
pub fn patch_integral_closed_form(
    patch: &FacePatch,
    lambda: f64,
    m: &[i64],
) -> Result<OscValue, OscError> {
    let d = patch.dim();
    if m.len() != d {
        return Err(OscError::DimensionMismatch {
            expected: d,
            found: m.len(),
        });
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(OscError::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let k = patch.axis;
    let nk = patch.normal[k];
    let mk = m[k] as f64;
    let mut value = unit_phase(lambda * patch.offset * mk / nk) / nk.abs();
    for (j, &(a, b)) in patch.free_axes().zip(&patch.bounds) {
        let theta = m[j] as f64 - mk * patch.normal[j] / nk;
        value *= interval_factor(lambda * theta, a, b);
    }
    Ok(OscValue {
        value,
        lambda,
        m: m.to_vec(),
        method: OscMethod::ClosedForm,
        error_estimate: 0.0,
    })
}

/// `∫_a^b e^{2πi x t} dt`.
fn interval_factor(x: f64, a: f64, b: f64) -> Complex64 {
    if x.abs() <= 1e-13 * a.abs().max(b.abs()).max(1.0) {
        return Complex64::new(b - a, 0.0);
    }
    let mid = unit_phase(0.5 * x * (a + b));
    // sin(π s) with s reduced modulo 2
    let s = x * (b - a);
    let r = s - 2.0 * (0.5 * s).round();
    mid * ((PI * r).sin() / (PI * x))
}
