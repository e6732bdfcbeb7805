//! Boundary data `g` on the unit torus, stored as a finite Fourier sum
//! `g(y) = Σ c_m e^{2πi m·y}`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PeriodicError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed periodic function document: {0}")]
    Parse(String),
}

/// Relative tolerance for the Hermitian symmetry test `c_{−m} = conj(c_m)`.
const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicFunction {
    dim: usize,
    coeffs: BTreeMap<Vec<i64>, Complex64>,
    real_valued: bool,
    declared_smoothness: Option<f64>,
}

impl PeriodicFunction {
    /// Builds `g` from `(m, c_m)` pairs; repeated frequencies are summed.
    pub fn from_coefficients<I>(dim: usize, entries: I) -> Result<Self, PeriodicError>
    where
        I: IntoIterator<Item = (Vec<i64>, Complex64)>,
    {
        if dim == 0 {
            return Err(PeriodicError::ZeroDimension);
        }
        let mut coeffs: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for (m, c) in entries {
            if m.len() != dim {
                return Err(PeriodicError::DimensionMismatch {
                    expected: dim,
                    found: m.len(),
                });
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(PeriodicError::InvalidParameter(format!(
                    "coefficient for {m:?} is not finite"
                )));
            }
            *coeffs.entry(m).or_default() += c;
        }
        let real_valued = is_hermitian(&coeffs);
        Ok(Self {
            dim,
            coeffs,
            real_valued,
            declared_smoothness: None,
        })
    }

    /// The constant function `value`.
    pub fn constant(dim: usize, value: f64) -> Self {
        Self::from_coefficients(dim, [(vec![0; dim], Complex64::new(value, 0.0))])
            .expect("valid constant")
    }

    /// `cos(2π m·y)`.
    pub fn cosine(m: Vec<i64>) -> Self {
        let neg: Vec<i64> = m.iter().map(|v| -v).collect();
        let dim = m.len();
        Self::from_coefficients(dim, [(m, Complex64::new(0.5, 0.0)), (neg, Complex64::new(0.5, 0.0))])
            .expect("valid cosine")
    }

    /// `sin(2π m·y)`.
    pub fn sine(m: Vec<i64>) -> Self {
        let neg: Vec<i64> = m.iter().map(|v| -v).collect();
        let dim = m.len();
        Self::from_coefficients(dim, [(m, Complex64::new(0.0, -0.5)), (neg, Complex64::new(0.0, 0.5))])
            .expect("valid sine")
    }

    pub fn add(&self, other: &Self) -> Result<Self, PeriodicError> {
        if other.dim != self.dim {
            return Err(PeriodicError::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Self::from_coefficients(
            self.dim,
            self.coeffs
                .iter()
                .chain(other.coeffs.iter())
                .map(|(m, c)| (m.clone(), *c)),
        )
    }

    pub fn with_declared_smoothness(mut self, s: f64) -> Self {
        self.declared_smoothness = Some(s);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coefficients(&self) -> &BTreeMap<Vec<i64>, Complex64> {
        &self.coeffs
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    pub fn declared_smoothness(&self) -> Option<f64> {
        self.declared_smoothness
    }

    /// `ḡ = c_0`, the torus mean.
    pub fn mean(&self) -> Complex64 {
        self.coeffs
            .get(&vec![0; self.dim])
            .copied()
            .unwrap_or_default()
    }

    /// `g − ḡ`.
    pub fn subtract_mean(&self) -> Self {
        let zero = vec![0; self.dim];
        let mut out = self.clone();
        out.coeffs.remove(&zero);
        out
    }

    /// True when every nonzero frequency has a zero coefficient.
    pub fn is_constant(&self) -> bool {
        self.coeffs
            .iter()
            .all(|(m, c)| m.iter().all(|&v| v == 0) || c.norm() == 0.0)
    }

    /// `Σ_{m≠0} |c_m|`, an upper bound for `‖g − ḡ‖_∞`.
    pub fn oscillation_bound(&self) -> f64 {
        self.coeffs
            .iter()
            .filter(|(m, _)| m.iter().any(|&v| v != 0))
            .map(|(_, c)| c.norm())
            .sum()
    }

    /// `Σ |c_m|²`, equal to the torus mean of `|g|²`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    /// Largest `|m_i|` in the support.
    pub fn max_frequency(&self) -> i64 {
        self.coeffs
            .keys()
            .flat_map(|m| m.iter().map(|v| v.abs()))
            .max()
            .unwrap_or(0)
    }

    /// `Σ c_m e^{2πi m·x}`. The phase `m·x` is reduced modulo 1 before
    /// scaling by 2π so large arguments keep their accuracy.
    pub fn evaluate(&self, x: &[f64]) -> Complex64 {
        debug_assert_eq!(x.len(), self.dim);
        let mut s = Complex64::default();
        for (m, c) in &self.coeffs {
            let t: f64 = m.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum();
            let frac = t - t.round();
            s += c * Complex64::from_polar(1.0, 2.0 * PI * frac);
        }
        s
    }

    /// Real part of [`evaluate`](Self::evaluate); exact for real-valued `g`
    /// up to rounding.
    pub fn evaluate_real(&self, x: &[f64]) -> f64 {
        self.evaluate(x).re
    }

    /// Frequencies in the index set `I_k`: those whose first nonzero
    /// component is at position `k`.
    pub fn index_set(&self, k: usize) -> Vec<&Vec<i64>> {
        self.coeffs
            .keys()
            .filter(|m| frequency_axis(m) == Some(k))
            .collect()
    }

    /// Returns a warning when the declared smoothness is below the larger of
    /// the two thresholds. Finite sums without a declaration always pass.
    pub fn smoothness_warning(&self, tau: f64) -> Option<String> {
        let s = self.declared_smoothness?;
        let need = smoothness_threshold(self.dim, tau).max(series_smoothness_threshold(self.dim, tau));
        (s < need).then(|| {
            let msg = format!(
                "declared smoothness {s} is below the threshold {need} for d = {}, tau = {tau}",
                self.dim
            );
            warn!("{msg}");
            msg
        })
    }

    pub fn to_doc(&self) -> PeriodicDoc {
        PeriodicDoc {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .map(|(m, c)| CoeffDoc {
                    m: m.clone(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
            smoothness: self.declared_smoothness,
        }
    }

    pub fn from_doc(doc: &PeriodicDoc) -> Result<Self, PeriodicError> {
        let mut g = Self::from_coefficients(
            doc.dim,
            doc.coeffs
                .iter()
                .map(|c| (c.m.clone(), Complex64::new(c.re, c.im))),
        )?;
        g.declared_smoothness = doc.smoothness;
        Ok(g)
    }

    pub fn from_json_str(s: &str) -> Result<Self, PeriodicError> {
        let doc: PeriodicDoc =
            serde_json::from_str(s).map_err(|e| PeriodicError::Parse(e.to_string()))?;
        Self::from_doc(&doc)
    }
}

/// JSON form `{"dim": d, "coeffs": [{"m": [..], "re": a, "im": b}, ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PeriodicDoc {
    pub dim: usize,
    pub coeffs: Vec<CoeffDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothness: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoeffDoc {
    pub m: Vec<i64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Position of the first nonzero component of `m`.
pub fn frequency_axis(m: &[i64]) -> Option<usize> {
    m.iter().position(|&v| v != 0)
}

/// `(d−1)/2 + (d−1)τ`.
pub fn smoothness_threshold(d: usize, tau: f64) -> f64 {
    let k = (d - 1) as f64;
    0.5 * k + k * tau
}

/// `d/2 + (d−1)τ`, the threshold quoted for absolute convergence of the
/// Fourier series.
pub fn series_smoothness_threshold(d: usize, tau: f64) -> f64 {
    0.5 * d as f64 + (d - 1) as f64 * tau
}

fn is_hermitian(coeffs: &BTreeMap<Vec<i64>, Complex64>) -> bool {
    let scale = coeffs.values().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
    coeffs.iter().all(|(m, c)| {
        let neg: Vec<i64> = m.iter().map(|v| -v).collect();
        let partner = coeffs.get(&neg).copied().unwrap_or_default();
        (partner - c.conj()).norm() <= HERMITIAN_TOL * scale
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn three_plus_cosine() {
        let g = PeriodicFunction::from_coefficients(
            2,
            [
                (vec![0, 0], c(3.0, 0.0)),
                (vec![1, 0], c(0.5, 0.0)),
                (vec![-1, 0], c(0.5, 0.0)),
            ],
        )
        .unwrap();
        assert!(g.is_real_valued());
        assert_eq!(g.mean(), c(3.0, 0.0));
        assert!((g.evaluate(&[0.0, 0.0]) - c(4.0, 0.0)).norm() < 1e-15);
        assert!((g.evaluate(&[0.25, 0.7]) - c(3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn non_hermitian_single_mode() {
        let g = PeriodicFunction::from_coefficients(2, [(vec![1, 0], c(0.0, 1.0))]).unwrap();
        assert!(!g.is_real_valued());
    }

    #[test]
    fn diagonal_sine() {
        let g = PeriodicFunction::sine(vec![1, 1]);
        assert_eq!(g.coefficients()[&vec![1, 1]], c(0.0, -0.5));
        assert!(g.is_real_valued());
        assert_eq!(g.mean(), c(0.0, 0.0));
        let x = [0.1, 0.05];
        let want = (2.0 * PI * 0.15).sin();
        assert!((g.evaluate_real(&x) - want).abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch() {
        let r = PeriodicFunction::from_coefficients(2, [(vec![1, 0, 0], c(1.0, 0.0))]);
        assert_eq!(
            r.unwrap_err(),
            PeriodicError::DimensionMismatch {
                expected: 2,
                found: 3
            }
        );
    }

    #[test]
    fn thresholds() {
        assert_eq!(smoothness_threshold(2, 1.0), 1.5);
        assert_eq!(smoothness_threshold(3, 2.0), 5.0);
        assert_eq!(series_smoothness_threshold(2, 1.0), 2.0);
        let g = PeriodicFunction::cosine(vec![1, 0]);
        assert!(g.smoothness_warning(1.0).is_none());
        assert!(g.clone().with_declared_smoothness(1.8).smoothness_warning(1.0).is_some());
        assert!(g.with_declared_smoothness(2.5).smoothness_warning(1.0).is_none());
    }

    #[test]
    fn subtract_mean_is_exact() {
        let g = PeriodicFunction::constant(2, 2.5).add(&PeriodicFunction::cosine(vec![2, 1])).unwrap();
        assert_eq!(g.subtract_mean().mean(), c(0.0, 0.0));
        assert!(!g.is_constant());
        assert!(PeriodicFunction::constant(2, 1.0).is_constant());
    }

    #[test]
    fn json_round_trip() {
        let g = PeriodicFunction::cosine(vec![1, 0]).add(&PeriodicFunction::sine(vec![1, 1])).unwrap();
        let s = serde_json::to_string(&g.to_doc()).unwrap();
        let h = PeriodicFunction::from_json_str(&s).unwrap();
        assert_eq!(g, h);
    }
}
