use rayon::prelude::*;
use serde::Serialize;

use crate::Complex64;

use super::{patch_integral_closed_form, FacePatch, OscError};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopeRow {
    pub lambda: f64,
    pub value: Complex64,
    pub abs: f64,
    /// `|I_λ|·λ^{d−1} / |m|₁^{(d−1)τ}`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayEnvelope {
    pub m: Vec<i64>,
    pub tau: f64,
    pub per_lambda: Vec<EnvelopeRow>,
    pub sup_ratio: f64,
}

impl DecayEnvelope {
    /// `max / min` of the ratio over rows with `λ ≥ lambda_min`.
    pub fn tail_spread(&self, lambda_min: f64) -> f64 {
        let tail: Vec<f64> = self
            .per_lambda
            .iter()
            .filter(|r| r.lambda >= lambda_min)
            .map(|r| r.ratio)
            .collect();
        let max = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = tail.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    }

    /// Ratio at the last grid point over the ratio at the first.
    pub fn growth(&self) -> f64 {
        match (self.per_lambda.first(), self.per_lambda.last()) {
            (Some(a), Some(b)) => b.ratio / a.ratio,
            _ => f64::NAN,
        }
    }
}

/// Measures `λ^{d−1}|I_λ(m)|`, normalized by `|m|₁^{(d−1)τ}`, along a grid
/// of frequencies. Requires `m_k ≠ 0` on the patch's eliminated axis.
pub fn decay_envelope(
    patch: &FacePatch,
    m: &[i64],
    lambdas: &[f64],
    tau: f64,
) -> Result<DecayEnvelope, OscError> {
    if m.len() != patch.dim() {
        return Err(OscError::DimensionMismatch {
            expected: patch.dim(),
            found: m.len(),
        });
    }
    if m[patch.axis()] == 0 {
        return Err(OscError::NotApplicable(format!(
            "m = {m:?} has no component along the eliminated axis {}",
            patch.axis()
        )));
    }
    let dm1 = (patch.dim() - 1) as i32;
    let l1: i64 = m.iter().map(|v| v.abs()).sum();
    let norm = (l1 as f64).powf(dm1 as f64 * tau);
    let per_lambda = lambdas
        .par_iter()
        .map(|&lambda| {
            let v = patch_integral_closed_form(patch, lambda, m)?.value;
            Ok(EnvelopeRow {
                lambda,
                value: v,
                abs: v.norm(),
                ratio: v.norm() * lambda.powi(dm1) / norm,
            })
        })
        .collect::<Result<Vec<_>, OscError>>()?;
    let sup_ratio = per_lambda.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(DecayEnvelope {
        m: m.to_vec(),
        tau,
        per_lambda,
        sup_ratio,
    })
}
