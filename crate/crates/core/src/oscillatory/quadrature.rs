use std::f64::consts::PI;

use crate::geometry::planar::{self, P2};
use crate::Complex64;

use super::patch::patch_measure;
use super::{unit_phase, FacePatch, OscError, OscMethod, OscValue};

/// Gauss points per panel and per axis.
const RULE: usize = 8;

/// Cap on the number of tensor panels a single quadrature may use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureBudget {
    pub max_panels: u64,
}

impl Default for QuadratureBudget {
    fn default() -> Self {
        Self {
            max_panels: 1 << 24,
        }
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Neumaier-compensated complex accumulator.
#[derive(Default)]
struct Sum {
    s: Complex64,
    c: Complex64,
}

impl Sum {
    fn add(&mut self, v: Complex64) {
        self.s.re = two_sum(self.s.re, v.re, &mut self.c.re);
        self.s.im = two_sum(self.s.im, v.im, &mut self.c.im);
    }

    fn value(&self) -> Complex64 {
        self.s + self.c
    }
}

fn two_sum(s: f64, v: f64, comp: &mut f64) -> f64 {
    let t = s + v;
    if s.abs() >= v.abs() {
        *comp += (s - t) + v;
    } else {
        *comp += (v - t) + s;
    }
    t
}

/// Phase `λ m·y` in cycles, evaluated at the lifted ambient point.
fn phase_cycles(patch: &FacePatch, lambda: f64, m: &[i64], free: &[f64]) -> f64 {
    let y = patch.lift(free);
    lambda * m.iter().zip(&y).map(|(&a, b)| a as f64 * b).sum::<f64>()
}

/// Rate of change of the phase (cycles per unit length) along each free
/// coordinate, measured by differencing the lifted phase.
fn phase_gradient(patch: &FacePatch, lambda: f64, m: &[i64]) -> Vec<f64> {
    let n = patch.bounds().len();
    let base = vec![0.0; n];
    let p0 = phase_cycles(patch, lambda, m, &base);
    (0..n)
        .map(|j| {
            let mut e = base.clone();
            e[j] = 1.0;
            phase_cycles(patch, lambda, m, &e) - p0
        })
        .collect()
}

fn axis_nodes(a: f64, b: f64, panels: usize, x: &[f64], w: &[f64]) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * x.len());
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(w) {
            out.push((lo + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
        }
    }
    out
}

fn tensor_sum(patch: &FacePatch, lambda: f64, m: &[i64], panels: &[usize]) -> Complex64 {
    let (x, w) = gauss_legendre(RULE);
    let axes: Vec<Vec<(f64, f64)>> = patch
        .bounds()
        .iter()
        .zip(panels)
        .map(|(&(a, b), &n)| axis_nodes(a, b, n, &x, &w))
        .collect();
    let dims = axes.len();
    let mut idx = vec![0usize; dims];
    let mut pt = vec![0.0; dims];
    let mut acc = Sum::default();
    'outer: loop {
        let mut weight = 1.0;
        for j in 0..dims {
            let (p, wj) = axes[j][idx[j]];
            pt[j] = p;
            weight *= wj;
        }
        acc.add(unit_phase(phase_cycles(patch, lambda, m, &pt)) * weight);
        for j in 0..dims {
            idx[j] += 1;
            if idx[j] < axes[j].len() {
                continue 'outer;
            }
            idx[j] = 0;
        }
        break;
    }
    acc.value() / patch.normal()[patch.axis()].abs()
}

fn check_budget(panels: &[usize], budget: QuadratureBudget) -> Result<(), OscError> {
    let needed = panels
        .iter()
        .fold(1u64, |acc, &n| acc.saturating_mul(n as u64));
    if needed > budget.max_panels {
        return Err(OscError::BudgetExceeded {
            needed,
            cap: budget.max_panels,
        });
    }
    Ok(())
}

/// Brute-force evaluation of `∫_Π e^{2πiλ m·y} dσ(y)` by tensor Gauss
/// quadrature over the projected box. Panels start at a quarter period of
/// the phase along each axis and are doubled until two successive results
/// differ by at most `tol`.
pub fn patch_integral_quadrature(
    patch: &FacePatch,
    lambda: f64,
    m: &[i64],
    tol: f64,
    budget: QuadratureBudget,
) -> Result<OscValue, OscError> {
    let d = patch.dim();
    if m.len() != d {
        return Err(OscError::DimensionMismatch {
            expected: d,
            found: m.len(),
        });
    }
    if !(tol > 0.0) {
        return Err(OscError::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let grad = phase_gradient(patch, lambda, m);
    let mut panels: Vec<usize> = patch
        .bounds()
        .iter()
        .zip(&grad)
        .map(|(&(a, b), g)| ((4.0 * g.abs() * (b - a)).ceil() as usize).max(1))
        .collect();
    check_budget(&panels, budget)?;
    let mut prev = tensor_sum(patch, lambda, m, &panels);
    loop {
        let next_panels: Vec<usize> = panels.iter().map(|n| 2 * n).collect();
        check_budget(&next_panels, budget)?;
        let next = tensor_sum(patch, lambda, m, &next_panels);
        let est = (next - prev).norm();
        if est <= tol {
            debug_assert!(next.norm() <= patch_measure(patch) * (1.0 + 1e-9));
            return Ok(OscValue {
                value: next,
                lambda,
                m: m.to_vec(),
                method: OscMethod::Quadrature,
                error_estimate: est,
            });
        }
        prev = next;
        panels = next_panels;
    }
}

fn triangle_sum(
    patch: &FacePatch,
    lambda: f64,
    m: &[i64],
    tri: [P2; 3],
    panels: usize,
) -> Complex64 {
    let (x, w) = gauss_legendre(RULE);
    let nodes = axis_nodes(0.0, 1.0, panels, &x, &w);
    let [a, b, c] = tri;
    let ab = planar::sub(b, a);
    let bc = planar::sub(c, b);
    let area2 = planar::cross(ab, planar::sub(c, a)).abs();
    let mut acc = Sum::default();
    // collapsed map p(u, v) = a + u·(b − a) + u·v·(c − b), Jacobian 2|T|·u
    for &(u, wu) in &nodes {
        for &(v, wv) in &nodes {
            let p = [
                a[0] + u * ab[0] + u * v * bc[0],
                a[1] + u * ab[1] + u * v * bc[1],
            ];
            acc.add(unit_phase(phase_cycles(patch, lambda, m, &p)) * (wu * wv * area2 * u));
        }
    }
    acc.value()
}

/// `∫ e^{2πiλ m·y} dσ(y)` over the part of the hyperplane of `patch` lying
/// above a convex polygon given in the patch's free coordinates (`d = 3`).
pub fn polygon_integral(
    patch: &FacePatch,
    polygon: &[P2],
    lambda: f64,
    m: &[i64],
    tol: f64,
    budget: QuadratureBudget,
) -> Result<OscValue, OscError> {
    if patch.dim() != 3 {
        return Err(OscError::UnsupportedDimension(patch.dim()));
    }
    if polygon.len() < 3 {
        return Err(OscError::InvalidParameter(
            "polygon needs at least three vertices".into(),
        ));
    }
    let grad = phase_gradient(patch, lambda, m);
    let speed = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    let mut diam: f64 = 0.0;
    for p in polygon {
        for q in polygon {
            diam = diam.max(planar::len2(planar::sub(*p, *q)));
        }
    }
    let tris: Vec<[P2; 3]> = (1..polygon.len() - 1)
        .map(|i| [polygon[0], polygon[i], polygon[i + 1]])
        .collect();
    let jac = 1.0 / patch.normal()[patch.axis()].abs();
    let total = |n: usize| -> Complex64 {
        tris.iter()
            .map(|&t| triangle_sum(patch, lambda, m, t, n))
            .sum::<Complex64>()
            * jac
    };
    let mut n = ((4.0 * speed * diam).ceil() as usize).max(1);
    check_budget(&[n, n, tris.len()], budget)?;
    let mut prev = total(n);
    loop {
        n *= 2;
        check_budget(&[n, n, tris.len()], budget)?;
        let next = total(n);
        let est = (next - prev).norm();
        if est <= tol {
            return Ok(OscValue {
                value: next,
                lambda,
                m: m.to_vec(),
                method: OscMethod::Quadrature,
                error_estimate: est,
            });
        }
        prev = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_is_exact_for_degree_15() {
        let (x, w) = gauss_legendre(8);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((integral - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn zero_frequency_is_measure() {
        let p = FacePatch::new(vec![0.6, 0.8], 0.1, 1, vec![(0.0, 0.7)]).unwrap();
        let v = patch_integral_quadrature(&p, 5.0, &[0, 0], 1e-13, QuadratureBudget::default())
            .unwrap();
        assert!((v.value.re - patch_measure(&p)).abs() < 1e-13);
    }

    #[test]
    fn budget_is_enforced() {
        let p = FacePatch::new(vec![0.6, 0.8], 0.1, 1, vec![(0.0, 1.0)]).unwrap();
        let r = patch_integral_quadrature(
            &p,
            1e6,
            &[3, 1],
            1e-12,
            QuadratureBudget { max_panels: 1000 },
        );
        assert!(matches!(r, Err(OscError::BudgetExceeded { .. })));
    }

    #[test]
    fn polygon_matches_box() {
        let n = [0.2f64, 0.3, 0.9];
        let l = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        let normal: Vec<f64> = n.iter().map(|v| v / l).collect();
        let p = FacePatch::new(normal, 0.4, 2, vec![(0.1, 0.3), (0.0, 0.25)]).unwrap();
        let square = [[0.1, 0.0], [0.3, 0.0], [0.3, 0.25], [0.1, 0.25]];
        let m = [2, -1, 1];
        let a = polygon_integral(&p, &square, 13.0, &m, 1e-13, QuadratureBudget::default())
            .unwrap()
            .value;
        let b = super::super::patch_integral_closed_form(&p, 13.0, &m)
            .unwrap()
            .value;
        assert!((a - b).norm() < 1e-12);
    }
}
