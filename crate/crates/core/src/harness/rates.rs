use serde::Serialize;

use super::HarnessError;

/// Exponents predicted for dimension `d`, corner parameter `α*`, Lebesgue
/// exponent `p` and margin `δ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TheoreticalRates {
    /// Hölder exponent: 1 when `α* > 1`, else `α* − δ`.
    pub beta: f64,
    /// `(d−1)/(d−1+β)`.
    pub kappa: f64,
    /// `β·κ`, the pointwise rate in `ε`.
    pub pointwise_exp: f64,
    /// `(d−1)·min(1,α*)/(d−1+min(1,α*))`.
    pub gamma: f64,
    /// `min(γ, 1/p) − δ`.
    pub lp_upper: f64,
    /// `1/p`: no `L^p` rate can be faster.
    pub lp_lower: f64,
}

pub fn theoretical_rates(
    d: usize,
    alpha_star: f64,
    p: f64,
    delta: f64,
) -> Result<TheoreticalRates, HarnessError> {
    if d < 2 {
        return Err(HarnessError::InvalidParameter(format!("dimension must be at least 2, got {d}")));
    }
    if !(alpha_star > 0.0) || !(p >= 1.0) || !(delta > 0.0) {
        return Err(HarnessError::InvalidParameter(format!(
            "need alpha_star > 0, p >= 1, delta > 0 (got {alpha_star}, {p}, {delta})"
        )));
    }
    let beta = if alpha_star > 1.0 { 1.0 } else { alpha_star - delta };
    if !(beta > 0.0) {
        return Err(HarnessError::InvalidParameter(format!(
            "delta {delta} leaves no Hölder exponent below alpha_star {alpha_star}"
        )));
    }
    let dm1 = (d - 1) as f64;
    let kappa = dm1 / (dm1 + beta);
    let a = alpha_star.min(1.0);
    let gamma = dm1 * a / (dm1 + a);
    Ok(TheoreticalRates {
        beta,
        kappa,
        pointwise_exp: beta * kappa,
        gamma,
        lp_upper: gamma.min(1.0 / p) - delta,
        lp_lower: 1.0 / p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_hexagon_and_cube() {
        let r = theoretical_rates(2, 1.0, 2.0, 1e-9).unwrap();
        assert!((r.gamma - 0.5).abs() < 1e-15);
        assert!((r.lp_upper - 0.5).abs() < 1e-8);
        assert!((r.pointwise_exp - 0.5).abs() < 1e-8);
        let r = theoretical_rates(2, 0.5, 2.0, 0.01).unwrap();
        assert!((r.gamma - 1.0 / 3.0).abs() < 1e-15);
        let r = theoretical_rates(3, 1.0, 10.0, 0.01).unwrap();
        assert!((r.gamma - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.lp_upper - 0.09).abs() < 1e-15);
        assert_eq!(r.lp_lower, 0.1);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(theoretical_rates(1, 1.0, 2.0, 0.01).is_err());
        assert!(theoretical_rates(2, 0.0, 2.0, 0.01).is_err());
        assert!(theoretical_rates(2, 1.0, 0.5, 0.01).is_err());
        assert!(theoretical_rates(2, 0.01, 2.0, 0.02).is_err());
    }
}
