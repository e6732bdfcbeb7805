use serde::Serialize;

use crate::stats::loglog_fit;

use super::HarnessError;

/// The largest ε is dropped when its log-deviation from the fit through the
/// remaining points exceeds this multiple of that fit's residual deviation.
pub const PREASYMPTOTIC_FACTOR: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    /// Slope of `log err` against `log ε`.
    pub exponent: f64,
    pub stderr: f64,
    /// Log-scale intercept (`err ≈ e^{intercept}·ε^{exponent}`).
    pub intercept: f64,
    pub residual_std: f64,
    pub n_points: usize,
    /// The ε removed by the preasymptotic guard, if any.
    pub dropped: Option<f64>,
}

/// Log-log least squares over `(ε, err)` pairs with the preasymptotic guard.
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<RateFit, HarnessError> {
    if pairs.len() < 3 {
        return Err(HarnessError::DegenerateFit(format!(
            "need at least 3 points, got {}",
            pairs.len()
        )));
    }
    if let Some(&(e, v)) = pairs.iter().find(|&&(e, v)| !(e > 0.0) || !(v > 0.0) || !v.is_finite()) {
        return Err(HarnessError::DegenerateFit(format!(
            "non-positive value {v} at epsilon {e}"
        )));
    }
    let fit = |pts: &[(f64, f64)]| {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
        loglog_fit(&x, &y).ok_or_else(|| HarnessError::DegenerateFit("epsilons are not distinct".into()))
    };
    let full = fit(pairs)?;
    let largest = (0..pairs.len())
        .max_by(|&a, &b| pairs[a].0.total_cmp(&pairs[b].0))
        .expect("non-empty");
    let mut used = full;
    let mut dropped = None;
    let mut n_points = pairs.len();
    if pairs.len() > 3 {
        // judge the largest ε against a fit that does not contain it, since
        // an in-sample residual can never exceed a few residual deviations
        let rest: Vec<(f64, f64)> = pairs
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != largest)
            .map(|(_, &p)| p)
            .collect();
        let reduced = fit(&rest)?;
        let (e, v) = pairs[largest];
        let deviation = (v.ln() - (reduced.intercept + reduced.slope * e.ln())).abs();
        if deviation > PREASYMPTOTIC_FACTOR * reduced.residual_std.max(1e-12) {
            used = reduced;
            dropped = Some(e);
            n_points -= 1;
        }
    }
    Ok(RateFit {
        exponent: used.slope,
        stderr: used.slope_stderr,
        intercept: used.intercept,
        residual_std: used.residual_std,
        n_points,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let eps = [0.5, 0.25, 0.125, 0.0625];
        let f = fit_rate(&eps.map(|e| (e, e))).unwrap();
        assert!((f.exponent - 1.0).abs() < 1e-12 && f.stderr < 1e-12);
        let f = fit_rate(&eps.map(|e| (e, 3.0 * e.sqrt()))).unwrap();
        assert!((f.exponent - 0.5).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert_eq!(f.dropped, None);
    }

    #[test]
    fn guard_drops_a_preasymptotic_largest_epsilon() {
        let mut pts: Vec<(f64, f64)> = [0.5f64, 0.25, 0.125, 0.0625, 0.03125]
            .iter()
            .zip([1.0, 1.02, 0.98, 1.01, 0.99])
            .map(|(&e, n)| (e, e.sqrt() * n))
            .collect();
        pts[0].1 *= 4.0;
        let f = fit_rate(&pts).unwrap();
        assert_eq!(f.dropped, Some(0.5));
        assert_eq!(f.n_points, 4);
        assert!((f.exponent - 0.5).abs() < 0.05);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(fit_rate(&[(0.5, 1.0), (0.25, 0.5)]), Err(HarnessError::DegenerateFit(_))));
        assert!(matches!(
            fit_rate(&[(0.5, 1.0), (0.25, 0.0), (0.1, 0.2)]),
            Err(HarnessError::DegenerateFit(_))
        ));
    }
}
