mod common;

use std::f64::consts::PI;

use common::golden_g;
use polyhom_core::fem::{
    gradient_probe, harmonic_measure, kernel_bound_probe, solve_dirichlet, triangulate,
    BoundaryData, CoefficientField, DirichletProblem, FemSolution, SolverConfig, SolverStats,
};
use polyhom_core::geometry::planar::{self, P2};
use polyhom_core::geometry::ConvexPolytope;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn hexagon() -> ConvexPolytope {
    ConvexPolytope::regular_polygon(6, 1.0, [0.0, 0.0]).unwrap()
}

fn solve(poly: &ConvexPolytope, h: f64, data: BoundaryData) -> FemSolution {
    let problem = DirichletProblem {
        polygon: poly.clone(),
        coefficient: CoefficientField::Identity,
        data,
    };
    solve_dirichlet(&problem, triangulate(poly, h, 0.0).unwrap(), SolverConfig::default()).unwrap()
}

fn loglog_slope(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let (x, y): (Vec<f64>, Vec<f64>) = pairs.iter().map(|(a, b)| (a.ln(), b.ln())).unzip();
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn mesh_area_is_conserved() {
    for poly in [hexagon(), ConvexPolytope::golden_square(), ConvexPolytope::unit_square()] {
        let area = planar::signed_area(&poly.vertices_2d().unwrap());
        for h in [0.2, 0.05] {
            let mesh = triangulate(&poly, h, 0.0).unwrap();
            assert!((mesh.total_area() - area).abs() <= 1e-9 * area);
            assert!(mesh.max_edge() <= h * (1.0 + 1e-12));
        }
    }
}

#[test]
fn manufactured_solution_orders() {
    let hex = hexagon();
    let exact = |p: P2| p[0] * p[0] - p[1] * p[1];
    let grad = |p: P2| [2.0 * p[0], -2.0 * p[1]];
    let mut l2 = Vec::new();
    let mut h1 = Vec::new();
    for h in [0.1, 0.05, 0.025] {
        let sol = solve(&hex, h, BoundaryData::function(exact));
        let hm = sol.mesh.max_edge();
        l2.push((hm, sol.l2_error_against(exact)));
        h1.push((hm, sol.h1_error_against(grad)));
    }
    assert!(loglog_slope(&l2) >= 1.9, "L2 order {}", loglog_slope(&l2));
    assert!(loglog_slope(&h1) >= 0.9, "H1 order {}", loglog_slope(&h1));
}

#[test]
fn oscillating_data_obey_the_maximum_principle() {
    let g = golden_g();
    let eps = 0.05;
    let data = BoundaryData::function(move |p| g.evaluate_real(&[p[0] / eps, p[1] / eps]));
    let sol = solve(&ConvexPolytope::golden_square(), 0.005, data);
    assert!(sol.max_principle_violation() <= 1e-10);
    assert!(sol.stats.residual <= SolverConfig::default().linear_tol);
}

#[test]
fn constants_are_solved_exactly_and_have_no_gradient() {
    let sol = solve(&ConvexPolytope::golden_square(), 0.05, BoundaryData::constant(-0.75));
    assert!(sol.values.iter().all(|&v| (v + 0.75).abs() < 1e-14));
    for t in 0..sol.mesh.n_triangles() {
        let g = sol.triangle_gradient(t);
        assert!(g[0].abs() < 1e-10 && g[1].abs() < 1e-10);
    }
    assert_eq!(sol.lp_error(-0.75, 2.0), 0.0);
}

#[test]
fn lp_error_matches_a_riemann_sum() {
    let sq = ConvexPolytope::unit_square();
    let mesh = triangulate(&sq, 0.1, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    // smooth trend plus nodal noise, kept away from zero so that |u|^p has
    // no kinks inside triangles
    let values: Vec<f64> = mesh
        .vertices
        .iter()
        .map(|p| 1.0 + 0.5 * p[0] - 0.3 * p[1] * p[1] + rng.random_range(-0.1..0.1))
        .collect();
    let stats = SolverStats { iterations: 0, residual: 0.0, multigrid: false };
    let sol = FemSolution::new(mesh, values, stats);
    let n = 1500;
    for p in [1.0, 2.0, 3.0] {
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = [(i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64];
                sum += sol.evaluate(x).unwrap().abs().powf(p);
            }
        }
        let riemann = (sum / (n * n) as f64).powf(1.0 / p);
        let lp = sol.lp_error(0.0, p);
        assert!((lp - riemann).abs() / riemann < 1e-3, "p = {p}: {lp} vs {riemann}");
    }
}

/// Boundary-edge mask of the edges whose midpoint lies below `y = 0`.
fn lower_edges(mesh: &polyhom_core::fem::TriMesh) -> Vec<bool> {
    mesh.boundary_edges
        .iter()
        .map(|e| mesh.vertices[e.v[0] as usize][1] + mesh.vertices[e.v[1] as usize][1] < 0.0)
        .collect()
}

#[test]
fn harmonic_measure_normalization_and_additivity() {
    let hex = hexagon();
    let mesh = triangulate(&hex, 0.05, 0.0).unwrap();
    let all = vec![true; mesh.boundary_edges.len()];
    let lower_mask = lower_edges(&mesh);
    let upper_mask: Vec<bool> = lower_mask.iter().map(|b| !b).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let cfg = SolverConfig::default();
    for _ in 0..4 {
        let x = common::interior_point(&mut rng, &hex, 0.05);
        let coef = CoefficientField::Identity;
        let total = harmonic_measure(&mesh, &coef, &all, x, cfg).unwrap();
        assert!((total - 1.0).abs() < 1e-8);
        let lower = harmonic_measure(&mesh, &coef, &lower_mask, x, cfg).unwrap();
        let upper = harmonic_measure(&mesh, &coef, &upper_mask, x, cfg).unwrap();
        assert!((lower + upper - 1.0).abs() < 1e-8, "{lower} + {upper}");
        assert!(lower > 0.0 && upper > 0.0);
    }
}

#[test]
fn kernel_bound_is_stable_and_coefficient_dependent() {
    let sq = ConvexPolytope::unit_square();
    let cfg = SolverConfig::default();
    let id = CoefficientField::Identity;
    let coarse = kernel_bound_probe(&sq, &id, [0.5, 0.5], 1.0 / 32.0, 1.0 / 128.0, cfg).unwrap();
    let fine = kernel_bound_probe(&sq, &id, [0.5, 0.5], 1.0 / 64.0, 1.0 / 256.0, cfg).unwrap();
    assert!((coarse.total_mass - 1.0).abs() < 1e-10);
    assert!((coarse.max_ratio - fine.max_ratio).abs() / coarse.max_ratio < 0.05);
    let aniso = kernel_bound_probe(&sq, &CoefficientField::diagonal(2.0, 1.0), [0.5, 0.5], 1.0 / 32.0, 1.0 / 128.0, cfg)
        .unwrap();
    assert!(aniso.max_ratio.is_finite() && aniso.max_ratio < 10.0);
    assert!((aniso.max_ratio - coarse.max_ratio).abs() > 0.05);
}

#[test]
fn opposite_face_measure_carries_the_distance_factor() {
    let sq = ConvexPolytope::unit_square();
    let top = sq.faces().iter().find(|f| f.normal[1] < -0.5).unwrap().index;
    let mut per_d = Vec::new();
    for y in [0.5, 0.3, 0.15, 0.08] {
        let k = kernel_bound_probe(&sq, &CoefficientField::Identity, [0.5, y], 1.0 / 32.0, 1.0 / 128.0, SolverConfig::default())
            .unwrap();
        let m: f64 = k.arcs.iter().filter(|a| a.face == top).map(|a| a.measure).sum();
        per_d.push(m / k.d_x);
        assert!(k.max_ratio < 1.0, "normalized ratio stays bounded, got {}", k.max_ratio);
    }
    // ω(x, far face) shrinks with d(x) at a comparable rate
    let (lo, hi) = per_d.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(hi / lo < 2.0, "{per_d:?}");
}

#[test]
fn corner_gradient_exponents() {
    let cfg = SolverConfig::default();
    let radii: Vec<f64> = (3..=8).map(|k| 2f64.powi(-k)).collect();
    let sq = ConvexPolytope::unit_square();
    let verts = sq.vertices_2d().unwrap();
    let origin = verts.iter().position(|v| v[0].abs() < 1e-12 && v[1].abs() < 1e-12).unwrap();
    // vanishes on both faces through the origin, generic elsewhere
    let data = BoundaryData::function(|p| p[0] * p[1] * (1.0 + p[0] + p[1] * p[1]));
    let g = gradient_probe(&sq, &CoefficientField::Identity, &data, origin, &radii, 0.05, cfg).unwrap();
    assert!((g.exponent - 1.0).abs() <= 0.1, "square {}", g.exponent);

    let hex = hexagon();
    let hv = hex.vertices_2d().unwrap();
    let c = 0;
    let n = hv.len();
    let incident: Vec<_> = hex
        .halfspaces()
        .iter()
        .filter(|h| h.slack(&hv[c]).abs() < 1e-12)
        .cloned()
        .collect();
    assert_eq!(incident.len(), 2);
    let data = BoundaryData::function(move |p| incident[0].slack(&p) * incident[1].slack(&p));
    let g = gradient_probe(&hex, &CoefficientField::Identity, &data, c, &radii, 0.05, cfg).unwrap();
    assert!((g.exponent - 0.5).abs() <= 0.1, "hexagon {} ({} vertices)", g.exponent, n);
    assert!((g.omega - 2.0 * PI / 3.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn linear_data_are_reproduced(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -1.0f64..1.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let poly = common::random_polygon(&mut rng);
        let sol = solve(&poly, 0.1, BoundaryData::function(move |p| a * p[0] + b * p[1] + c));
        for _ in 0..10 {
            let x = common::interior_point(&mut rng, &poly, 0.0);
            prop_assert!((sol.evaluate(x).unwrap() - (a * x[0] + b * x[1] + c)).abs() < 1e-9);
        }
    }
}
