use serde::{Deserialize, Serialize};

use crate::fem::{
    solve_dirichlet, triangulate, BoundaryData, CoefficientField, DirichletProblem, SolverConfig,
    VERTEX_CAP,
};
use crate::geometry::planar::{self, P2};
use crate::geometry::{certify_polytope, ConvexPolytope};
use crate::periodic::PeriodicFunction;

use super::{fit_rate, theoretical_rates, HarnessError, RateFit, TheoreticalRates};

/// Half-width of the window around `1/p` accepted by the optimality check.
pub const OPTIMALITY_TOL: f64 = 0.08;

/// Exponent and lattice bound used for the Diophantine warning.
const CERT_TAU: f64 = 1.0;
const CERT_BOUND: u64 = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub id: String,
    pub x: P2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Strictly decreasing, positive.
    pub epsilons: Vec<f64>,
    pub p_values: Vec<f64>,
    pub probe_points: Vec<ProbePoint>,
    /// Mesh size is `ε / oversampling`.
    #[serde(default = "default_oversampling")]
    pub oversampling: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "default_vertex_cap")]
    pub vertex_cap: usize,
}

fn default_oversampling() -> f64 {
    10.0
}

fn default_delta() -> f64 {
    0.01
}

fn default_vertex_cap() -> usize {
    VERTEX_CAP
}

impl SweepConfig {
    pub fn new(epsilons: Vec<f64>, p_values: Vec<f64>, probe_points: Vec<ProbePoint>) -> Self {
        Self {
            epsilons,
            p_values,
            probe_points,
            oversampling: default_oversampling(),
            delta: default_delta(),
            solver: SolverConfig::default(),
            vertex_cap: default_vertex_cap(),
        }
    }

    fn validate(&self, poly: &ConvexPolytope) -> Result<Vec<f64>, HarnessError> {
        let bad = |m: String| Err(HarnessError::InvalidConfig(m));
        if self.epsilons.is_empty() {
            return bad("no epsilons".into());
        }
        if self.epsilons.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return bad("epsilons must be positive and finite".into());
        }
        if self.epsilons.windows(2).any(|w| !(w[1] < w[0])) {
            return bad("epsilons must be strictly decreasing".into());
        }
        if let Some(p) = self.p_values.iter().find(|p| !(**p >= 1.0) || !p.is_finite()) {
            return bad(format!("p must be finite and at least 1, got {p}"));
        }
        if !(self.oversampling > 0.0) || !(self.delta > 0.0) {
            return bad("oversampling and delta must be positive".into());
        }
        let spacing = self.epsilons[0] / self.oversampling;
        let mut ids: Vec<&str> = self.probe_points.iter().map(|q| q.id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return bad("probe ids must be unique".into());
        }
        let mut dists = Vec::with_capacity(self.probe_points.len());
        for q in &self.probe_points {
            let d = if poly.contains(&q.x, 0.0) {
                poly.distance_to_boundary(&q.x)?
            } else {
                0.0
            };
            if d < 2.0 * spacing {
                return bad(format!(
                    "probe {} has d(x) = {d}, below twice the mesh spacing {spacing}",
                    q.id
                ));
            }
            dists.push(d);
        }
        Ok(dists)
    }
}

/// Points on the segment from the midpoint of `face` toward the polygon
/// centroid whose distance to that face is each of `distances`. Ids are
/// `d<distance>`.
pub fn probe_points_on_face(
    poly: &ConvexPolytope,
    face: usize,
    distances: &[f64],
) -> Result<Vec<ProbePoint>, HarnessError> {
    let f = poly
        .face(face)
        .ok_or_else(|| HarnessError::InvalidParameter(format!("half-space {face} has no face")))?;
    let mid = f.centroid().ok_or_else(|| HarnessError::InvalidParameter("empty face".into()))?;
    let verts = poly.vertices_2d()?;
    let c = planar::centroid(&verts);
    let mid = [mid[0], mid[1]];
    let dir = planar::sub(c, mid);
    let nu = f.normal.as_slice();
    let rate = nu[0] * dir[0] + nu[1] * dir[1];
    let mut out = Vec::with_capacity(distances.len());
    for &d in distances {
        if !(d > 0.0 && d < rate) {
            return Err(HarnessError::InvalidParameter(format!(
                "distance {d} does not fit between face {face} and the centroid"
            )));
        }
        let t = d / rate;
        out.push(ProbePoint {
            id: format!("d{d}"),
            x: [mid[0] + t * dir[0], mid[1] + t * dir[1]],
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonRecord {
    pub epsilon: f64,
    /// Longest mesh edge.
    pub h_used: f64,
    pub n_vertices: usize,
    pub solver_iters: usize,
    pub residual: f64,
    /// `(p, ‖u_ε − ḡ‖_{L^p})`.
    pub lp: Vec<(f64, f64)>,
    /// `(probe id, |u_ε(x) − ḡ|)`.
    pub pointwise: Vec<(String, f64)>,
    /// Set when this ε failed; the other fields are then empty or zero.
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub gbar: f64,
    /// `‖g − ḡ‖_∞` bound from the coefficients.
    pub oscillation: f64,
    /// `(probe id, x, d(x))`.
    pub probes: Vec<(String, P2, f64)>,
    pub records: Vec<EpsilonRecord>,
    pub warnings: Vec<String>,
}

impl SweepResult {
    pub fn successful(&self) -> impl Iterator<Item = &EpsilonRecord> {
        self.records.iter().filter(|r| r.failure.is_none())
    }

    /// `(ε, ‖u_ε − ḡ‖_{L^p})` over successful solves.
    pub fn lp_series(&self, p: f64) -> Vec<(f64, f64)> {
        self.successful()
            .filter_map(|r| r.lp.iter().find(|(q, _)| *q == p).map(|&(_, v)| (r.epsilon, v)))
            .collect()
    }

    pub fn pointwise_series(&self, probe: &str) -> Vec<(f64, f64)> {
        self.successful()
            .filter_map(|r| {
                r.pointwise
                    .iter()
                    .find(|(id, _)| id == probe)
                    .map(|(_, v)| (r.epsilon, *v))
            })
            .collect()
    }
}

/// Solves the oscillating problem once per ε (mesh size `ε/η`) and records
/// `L^p` and pointwise deviations from the homogenized constant `ḡ`. A
/// failing ε is recorded and does not stop the sweep. The ε values run one
/// after another so that only one fine mesh is held in memory; each solve is
/// internally parallel.
pub fn run_sweep(
    poly: &ConvexPolytope,
    coef: &CoefficientField,
    g: &PeriodicFunction,
    config: &SweepConfig,
) -> Result<SweepResult, HarnessError> {
    if poly.dim() != 2 {
        return Err(crate::geometry::GeometryError::UnsupportedDimension(poly.dim()).into());
    }
    if g.dim() != 2 || !g.is_real_valued() {
        return Err(HarnessError::InvalidConfig(
            "boundary data must be real-valued on the 2-torus".into(),
        ));
    }
    let dists = config.validate(poly)?;
    coef.validate(poly)?;
    let mut warnings = Vec::new();
    let cert = certify_polytope(poly, CERT_TAU, CERT_BOUND)?;
    let rational = cert.rational_faces();
    if !rational.is_empty() {
        warnings.push(format!("non-Diophantine normal on faces {rational:?}"));
    }
    let gbar = g.mean().re;
    let problem = DirichletProblem {
        polygon: poly.clone(),
        coefficient: coef.clone(),
        data: BoundaryData::constant(0.0),
    };
    let records = config
        .epsilons
        .iter()
        .map(|&epsilon| {
            let mut problem = problem.clone();
            problem.data = BoundaryData::Periodic {
                g: g.clone(),
                epsilon,
            };
            solve_one(&problem, epsilon, gbar, config).unwrap_or_else(|e| {
                log::warn!("epsilon {epsilon} failed: {e}");
                EpsilonRecord {
                    epsilon,
                    h_used: 0.0,
                    n_vertices: 0,
                    solver_iters: 0,
                    residual: 0.0,
                    lp: Vec::new(),
                    pointwise: Vec::new(),
                    failure: Some(e.to_string()),
                }
            })
        })
        .collect();
    Ok(SweepResult {
        config: config.clone(),
        gbar,
        oscillation: g.oscillation_bound(),
        probes: config
            .probe_points
            .iter()
            .zip(dists)
            .map(|(q, d)| (q.id.clone(), q.x, d))
            .collect(),
        records,
        warnings,
    })
}

fn solve_one(
    problem: &DirichletProblem,
    epsilon: f64,
    gbar: f64,
    config: &SweepConfig,
) -> Result<EpsilonRecord, HarnessError> {
    let h = epsilon / config.oversampling;
    let mesh = triangulate(&problem.polygon, h, 0.0)?;
    if mesh.n_vertices() > config.vertex_cap {
        return Err(crate::fem::FemError::BudgetExceeded {
            needed: mesh.n_vertices(),
            cap: config.vertex_cap,
        }
        .into());
    }
    let h_used = mesh.max_edge();
    let sol = solve_dirichlet(problem, mesh, config.solver)?;
    let lp = config
        .p_values
        .iter()
        .map(|&p| (p, sol.lp_error(gbar, p)))
        .collect();
    let pointwise = config
        .probe_points
        .iter()
        .map(|q| Ok((q.id.clone(), (sol.evaluate(q.x)? - gbar).abs())))
        .collect::<Result<_, HarnessError>>()?;
    Ok(EpsilonRecord {
        epsilon,
        h_used,
        n_vertices: sol.mesh.n_vertices(),
        solver_iters: sol.stats.iterations,
        residual: sol.stats.residual,
        lp,
        pointwise,
        failure: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointwiseEnvelope {
    pub probe: String,
    pub d_x: f64,
    /// `(ε, |u_ε(x) − ḡ| / (ε^β/d(x)^{β+δ})^{(d−1)/(d−1+β)})`.
    pub constants: Vec<(f64, f64)>,
    pub max: f64,
    pub median: f64,
    pub last: f64,
    /// `last ≤ 2·median`.
    pub non_diverging: bool,
}

/// Measured constants of the pointwise bound for one probe (`d = 2`).
pub fn pointwise_envelope(
    result: &SweepResult,
    probe: &str,
    beta: f64,
    delta: f64,
) -> Result<PointwiseEnvelope, HarnessError> {
    let (_, _, d_x) = result
        .probes
        .iter()
        .find(|(id, _, _)| id == probe)
        .ok_or_else(|| HarnessError::InvalidParameter(format!("unknown probe {probe}")))?;
    let dm1 = 1.0;
    let constants: Vec<(f64, f64)> = result
        .pointwise_series(probe)
        .into_iter()
        .map(|(e, v)| {
            let scale = (e.powf(beta) / d_x.powf(beta + delta)).powf(dm1 / (dm1 + beta));
            (e, v / scale)
        })
        .collect();
    if constants.is_empty() {
        return Err(HarnessError::DegenerateFit(format!("no successful samples for probe {probe}")));
    }
    let mut sorted: Vec<f64> = constants.iter().map(|c| c.1).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let last = constants.last().expect("non-empty").1;
    Ok(PointwiseEnvelope {
        probe: probe.to_string(),
        d_x: *d_x,
        max: sorted[n - 1],
        median,
        last,
        non_diverging: last <= 2.0 * median,
        constants,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status")]
pub enum Optimality {
    /// `1/p < γ`: the fitted rate must sit within [`OPTIMALITY_TOL`] of `1/p`.
    Checked {
        fitted: f64,
        lower_exp: f64,
        /// `fitted − 1/p`.
        margin: f64,
        pass: bool,
    },
    /// `1/p ≥ γ`: the `1/p` lower bound does not bind.
    NotBinding { lower_exp: f64, gamma: f64 },
    /// `g` is constant, so there is nothing to measure.
    ConstantData,
}

pub fn optimality_check(
    result: &SweepResult,
    p: f64,
    gamma: f64,
) -> Result<Optimality, HarnessError> {
    if !(result.oscillation > 0.0) {
        return Ok(Optimality::ConstantData);
    }
    let lower = 1.0 / p;
    if lower >= gamma {
        return Ok(Optimality::NotBinding {
            lower_exp: lower,
            gamma,
        });
    }
    let fit = fit_rate(&result.lp_series(p))?;
    let margin = fit.exponent - lower;
    Ok(Optimality::Checked {
        fitted: fit.exponent,
        lower_exp: lower,
        margin,
        pass: margin.abs() <= OPTIMALITY_TOL,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpFit {
    pub p: f64,
    pub theory: TheoreticalRates,
    /// `None` when the fit is degenerate (for example constant data).
    pub fit: Option<RateFit>,
    pub optimality: Optimality,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub alpha_star: f64,
    pub delta: f64,
    pub beta: f64,
    pub pointwise_exp: f64,
    pub gamma: f64,
    pub lp: Vec<LpFit>,
    pub envelopes: Vec<PointwiseEnvelope>,
    /// Every binding optimality check passes and every envelope is
    /// non-diverging.
    pub pass: bool,
}

/// Fits every `L^p` series, evaluates the envelopes and optimality checks,
/// and attaches the theoretical exponents for the polygon's `α*`.
pub fn rate_report(poly: &ConvexPolytope, result: &SweepResult) -> Result<RateReport, HarnessError> {
    let alpha_star = poly.max_adjacent_angle()?.alpha_star;
    let delta = result.config.delta;
    let base = theoretical_rates(2, alpha_star, 1.0, delta)?;
    let mut lp = Vec::new();
    for &p in &result.config.p_values {
        let theory = theoretical_rates(2, alpha_star, p, delta)?;
        let fit = fit_rate(&result.lp_series(p)).ok();
        let optimality = match optimality_check(result, p, theory.gamma) {
            Ok(o) => o,
            Err(HarnessError::DegenerateFit(_)) => Optimality::ConstantData,
            Err(e) => return Err(e),
        };
        lp.push(LpFit {
            p,
            theory,
            fit,
            optimality,
        });
    }
    let mut envelopes = Vec::new();
    if result.oscillation > 0.0 {
        for (id, _, _) in &result.probes {
            if let Ok(env) = pointwise_envelope(result, id, base.beta, delta) {
                envelopes.push(env);
            }
        }
    }
    let pass = lp.iter().all(|f| !matches!(f.optimality, Optimality::Checked { pass: false, .. }))
        && envelopes.iter().all(|e| e.non_diverging);
    Ok(RateReport {
        alpha_star,
        delta,
        beta: base.beta,
        pointwise_exp: base.pointwise_exp,
        gamma: base.gamma,
        lp,
        envelopes,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq() -> ConvexPolytope {
        ConvexPolytope::unit_square()
    }

    #[test]
    fn config_validation() {
        let probes = probe_points_on_face(&sq(), 0, &[0.3]).unwrap();
        let ok = SweepConfig::new(vec![0.25, 0.125], vec![2.0], probes.clone());
        assert!(ok.validate(&sq()).is_ok());
        let mut c = ok.clone();
        c.epsilons = vec![0.125, 0.25];
        assert!(c.validate(&sq()).is_err());
        let mut c = ok.clone();
        c.p_values = vec![0.5];
        assert!(c.validate(&sq()).is_err());
        let near = probe_points_on_face(&sq(), 0, &[0.01]).unwrap();
        let c = SweepConfig::new(vec![0.25], vec![2.0], near);
        assert!(c.validate(&sq()).is_err());
    }

    #[test]
    fn probes_sit_at_requested_distance() {
        let gold = ConvexPolytope::golden_square();
        let pts = probe_points_on_face(&gold, 0, &[0.05, 0.15, 0.3]).unwrap();
        for (q, d) in pts.iter().zip([0.05, 0.15, 0.3]) {
            assert!((gold.distance_to_boundary(&q.x).unwrap() - d).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_data_gives_zero_errors() {
        let g = PeriodicFunction::constant(2, 1.5);
        let probes = probe_points_on_face(&sq(), 0, &[0.3]).unwrap();
        let cfg = SweepConfig::new(vec![0.5, 0.25, 0.125], vec![1.0, 2.0], probes);
        let r = run_sweep(&sq(), &CoefficientField::Identity, &g, &cfg).unwrap();
        assert_eq!(r.records.len(), 3);
        for rec in &r.records {
            assert!(rec.failure.is_none());
            assert!(rec.lp.iter().all(|&(_, v)| v < 1e-12));
            assert!(rec.pointwise.iter().all(|(_, v)| *v < 1e-12));
        }
        assert_eq!(optimality_check(&r, 5.0, 0.5).unwrap(), Optimality::ConstantData);
        let report = rate_report(&sq(), &r).unwrap();
        assert!(report.envelopes.is_empty());
    }
}
