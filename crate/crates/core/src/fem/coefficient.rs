use std::fmt;
use std::sync::Arc;

use crate::geometry::planar::P2;
use crate::geometry::ConvexPolytope;

use super::FemError;

pub type MatrixField = Arc<dyn Fn(P2) -> [[f64; 2]; 2] + Send + Sync>;

/// Coefficient matrix `A(x)` of the operator `−div(A∇·)` with declared
/// ellipticity constant `c`: eigenvalues must lie in `[1/c, c]`.
#[derive(Clone)]
pub enum CoefficientField {
    Identity,
    Constant { a: [[f64; 2]; 2], c: f64 },
    Variable { f: MatrixField, c: f64, name: String },
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity => write!(f, "Identity"),
            Self::Constant { a, c } => write!(f, "Constant({a:?}, c = {c})"),
            Self::Variable { name, c, .. } => write!(f, "Variable({name}, c = {c})"),
        }
    }
}

impl CoefficientField {
    pub fn diagonal(a11: f64, a22: f64) -> Self {
        let c = [a11, a22, 1.0 / a11, 1.0 / a22]
            .into_iter()
            .fold(1.0, f64::max);
        Self::Constant {
            a: [[a11, 0.0], [0.0, a22]],
            c,
        }
    }

    pub fn at(&self, x: P2) -> [[f64; 2]; 2] {
        match self {
            Self::Identity => [[1.0, 0.0], [0.0, 1.0]],
            Self::Constant { a, .. } => *a,
            Self::Variable { f, .. } => f(x),
        }
    }

    pub fn ellipticity(&self) -> f64 {
        match self {
            Self::Identity => 1.0,
            Self::Constant { c, .. } | Self::Variable { c, .. } => *c,
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Self::Identity)
    }

    /// Checks exact symmetry and the eigenvalue bounds on a grid of points
    /// inside the polygon.
    pub fn validate(&self, poly: &ConvexPolytope) -> Result<(), FemError> {
        const N: usize = 9;
        let c = self.ellipticity();
        let bbox = poly.bounding_box();
        let mut samples = vec![[poly.interior_point()[0], poly.interior_point()[1]]];
        for i in 0..N {
            for j in 0..N {
                let x = bbox[0].0 + (bbox[0].1 - bbox[0].0) * (i as f64 + 0.5) / N as f64;
                let y = bbox[1].0 + (bbox[1].1 - bbox[1].0) * (j as f64 + 0.5) / N as f64;
                if poly.contains(&[x, y], 0.0) {
                    samples.push([x, y]);
                }
            }
        }
        for p in samples {
            let a = self.at(p);
            if a[0][1] != a[1][0] {
                return Err(FemError::NonSymmetricCoefficients { x: p[0], y: p[1] });
            }
            let tr = a[0][0] + a[1][1];
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
            for eig in [0.5 * tr - disc, 0.5 * tr + disc] {
                if !(eig >= 1.0 / c * (1.0 - 1e-12) && eig <= c * (1.0 + 1e-12)) {
                    return Err(FemError::NotElliptic {
                        x: p[0],
                        y: p[1],
                        eigenvalue: eig,
                        c,
                    });
                }
            }
        }
        Ok(())
    }
}
