mod common;

use std::f64::consts::PI;

use common::{golden_normal, random_polygon, random_unit, PHI};
use polyhom_core::geometry::{
    diophantine_check, face_strip_membership, lattice_partition, ConvexPolytope, FaceShape,
    HalfSpace,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn seg_dist_ternary(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let f = |t: f64| {
        let q = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    f(0.5 * (lo + hi)).min(f(0.0)).min(f(1.0))
}

/// Minimum over dense boundary samples, refined by ternary search on each
/// edge (distance along a segment is convex in the parameter).
fn boundary_distance_oracle(poly: &ConvexPolytope, x: [f64; 2]) -> f64 {
    let v = poly.vertices_2d().unwrap();
    let n = v.len();
    (0..n)
        .map(|i| seg_dist_ternary(x, v[i], v[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

fn rotate(v: [f64; 2], a: f64) -> [f64; 2] {
    let (s, c) = a.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

#[test]
fn golden_square_matches_rotated_vertices() {
    let theta = PHI.atan();
    let gold = ConvexPolytope::golden_square();
    assert_eq!(gold.faces().len(), 4);
    let verts = gold.vertices_2d().unwrap();
    for corner in [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]] {
        let r = rotate(corner, theta);
        let best = verts
            .iter()
            .map(|v| (v[0] - r[0]).hypot(v[1] - r[1]))
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-12, "rotated corner {r:?} missing");
    }
    for f in gold.faces() {
        assert!((f.measure().unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn hexagon_faces_have_equal_length() {
    let hex = ConvexPolytope::regular_polygon(6, 1.0, [0.0, 0.0]).unwrap();
    assert_eq!(hex.faces().len(), 6);
    // chord of a unit circle subtending π/3
    let side = 2.0 * (PI / 6.0).sin();
    for f in hex.faces() {
        assert!((f.measure().unwrap() - side).abs() < 1e-12);
    }
}

#[test]
fn hexagon_distance_matches_sampling_oracle() {
    let hex = ConvexPolytope::regular_polygon(6, 1.0, [0.0, 0.0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..200 {
        let x = common::interior_point(&mut rng, &hex, 0.0);
        let d = hex.distance_to_boundary(&x).unwrap();
        assert!((d - boundary_distance_oracle(&hex, x)).abs() < 1e-9);
    }
}

#[test]
fn cube_singular_distance_by_edge_enumeration() {
    let cube = ConvexPolytope::unit_cube();
    let x = [0.5, 0.5, 0.1];
    let mut best = f64::INFINITY;
    // the 12 edges join corners differing in exactly one coordinate
    for a in 0..8u32 {
        for k in 0..3 {
            if a & (1 << k) == 0 {
                let b = a | (1 << k);
                let p = |m: u32| [(m & 1) as f64, ((m >> 1) & 1) as f64, ((m >> 2) & 1) as f64];
                let (pa, pb) = (p(a), p(b));
                let t = ((0..3).map(|i| (x[i] - pa[i]) * (pb[i] - pa[i])).sum::<f64>()).clamp(0.0, 1.0);
                let d = (0..3)
                    .map(|i| (x[i] - pa[i] - t * (pb[i] - pa[i])).powi(2))
                    .sum::<f64>()
                    .sqrt();
                best = best.min(d);
            }
        }
    }
    // the bottom edges at z = 0 are nearer than any edge midpoint at 0.5
    assert!((best - 0.26f64.sqrt()).abs() < 1e-12);
    assert!((cube.distance_to_singular(&x).unwrap() - best).abs() < 1e-12);
}

#[test]
fn interior_angles_of_reference_polygons() {
    let sq = ConvexPolytope::unit_square().max_adjacent_angle().unwrap();
    assert!((sq.omega_max - PI / 2.0).abs() < 1e-12 && (sq.alpha_star - 1.0).abs() < 1e-12);
    let hex = ConvexPolytope::regular_polygon(6, 1.0, [0.0, 0.0])
        .unwrap()
        .max_adjacent_angle()
        .unwrap();
    assert!((hex.omega_max - 2.0 * PI / 3.0).abs() < 1e-12);
    assert!((hex.alpha_star - 0.5).abs() < 1e-12);
    let gold = ConvexPolytope::golden_square().max_adjacent_angle().unwrap();
    assert!((gold.omega_max - sq.omega_max).abs() < 1e-12);
}

#[test]
fn diophantine_reference_directions() {
    let c = diophantine_check(&[1.0, 0.0], 1.0, 1);
    assert_eq!(c.c_lower, 0.0);
    assert_eq!(c.worst_m, vec![0, 1]);
    let s = 0.5f64.sqrt();
    let c = diophantine_check(&[s, s], 1.0, 2);
    assert_eq!(c.c_lower, 0.0);
    assert_eq!(c.worst_m, vec![1, -1]);
}

#[test]
fn golden_certificate_is_positive_and_stable() {
    let nu = golden_normal();
    let a = diophantine_check(&nu, 1.0, 500);
    let b = diophantine_check(&nu, 1.0, 1000);
    assert!(b.c_lower > 0.2, "{}", b.c_lower);
    assert!(b.c_lower <= a.c_lower);
    assert!((a.c_lower - b.c_lower) / a.c_lower < 0.05);
}

#[test]
fn hexagon_face_strip_near_endpoint() {
    let hex = ConvexPolytope::regular_polygon(6, 1.0, [0.0, 0.0]).unwrap();
    let f = &hex.faces()[0];
    let FaceShape::Segment { start, end } = f.shape.clone() else {
        panic!("hexagon faces are segments")
    };
    let at = |s: f64| {
        let len = f.measure().unwrap();
        let t = s / len;
        vec![start[0] + t * (end[0] - start[0]), start[1] + t * (end[1] - start[1])]
    };
    assert!(face_strip_membership(f, 0.01, &at(0.005)).unwrap());
    assert!(!face_strip_membership(f, 0.01, &at(0.5)).unwrap());
    assert!(face_strip_membership(f, 0.01, &at(f.measure().unwrap() - 0.005)).unwrap());
}

#[test]
fn redundant_halfspace_keeps_four_faces() {
    let s = 0.5f64.sqrt();
    let mut hs: Vec<HalfSpace> = ConvexPolytope::unit_square().halfspaces().to_vec();
    // tangent to the square at (1, 1)
    hs.push(HalfSpace::new(vec![-s, -s], -2.0 * s).unwrap());
    let p = ConvexPolytope::new(hs).unwrap();
    assert_eq!(p.faces().len(), 4);
    assert_eq!(p.degenerate_halfspaces(), &[4]);
}

#[test]
fn projection_distortion_on_random_faces() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checked = 0;
    while checked < 1000 {
        let d = if checked % 2 == 0 { 2 } else { 3 };
        let nu = random_unit(&mut rng, d);
        let k = rng.random_range(0..d);
        if nu[k].abs() < 0.1 {
            continue;
        }
        // two points of the plane ν·y = c with random free coordinates
        let c = rng.random_range(-1.0..1.0);
        let mut pt = || {
            let mut y: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let rest: f64 = (0..d).filter(|&j| j != k).map(|j| nu[j] * y[j]).sum();
            y[k] = (c - rest) / nu[k];
            y
        };
        let (x, y) = (pt(), pt());
        let full = (0..d).map(|j| (x[j] - y[j]).powi(2)).sum::<f64>().sqrt();
        let proj = (0..d)
            .filter(|&j| j != k)
            .map(|j| (x[j] - y[j]).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(nu[k].abs() * full <= proj * (1.0 + 1e-12) + 1e-15);
        assert!(proj <= full * (1.0 + 1e-12));
        checked += 1;
    }
}

fn rigid_copy(poly: &ConvexPolytope, angle: f64, shift: [f64; 2]) -> ConvexPolytope {
    let v: Vec<[f64; 2]> = poly
        .vertices_2d()
        .unwrap()
        .iter()
        .map(|p| {
            let r = rotate(*p, angle);
            [r[0] + shift[0], r[1] + shift[1]]
        })
        .collect();
    ConvexPolytope::from_vertices_2d(&v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_matches_oracle_on_random_polygons(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let poly = random_polygon(&mut rng);
        for _ in 0..20 {
            let x = common::interior_point(&mut rng, &poly, 0.0);
            let d = poly.distance_to_boundary(&x).unwrap();
            prop_assert!((d - boundary_distance_oracle(&poly, x)).abs() < 1e-9);
        }
    }

    #[test]
    fn max_angle_is_rigid_motion_invariant(seed in any::<u64>(), angle in -3.0f64..3.0, sx in -1.0f64..1.0, sy in -1.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let poly = random_polygon(&mut rng);
        let a = poly.max_adjacent_angle().unwrap();
        let b = rigid_copy(&poly, angle, [sx, sy]).max_adjacent_angle().unwrap();
        prop_assert!((a.omega_max - b.omega_max).abs() < 1e-12);
    }

    #[test]
    fn diophantine_bound_is_monotone(a in 0.05f64..1.0, b in 0.05f64..1.0, m1 in 1u64..40, extra in 1u64..40) {
        let n = a.hypot(b);
        let nu = [a / n, b / n];
        let small = diophantine_check(&nu, 1.0, m1);
        let large = diophantine_check(&nu, 1.0, m1 + extra);
        prop_assert!(large.c_lower <= small.c_lower);
    }

    #[test]
    fn partition_measures_add_up(seed in any::<u64>(), rho in 0.02f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let poly = random_polygon(&mut rng);
        for f in poly.faces() {
            let k = if f.normal[0].abs() > f.normal[1].abs() { 0 } else { 1 };
            let part = lattice_partition(f, k, rho).unwrap();
            let total = part.cells_measure() + part.leftover_measure();
            prop_assert!((total - part.face_measure).abs() <= 1e-9 * part.face_measure);
            prop_assert!(part.leftover_in_strip());
        }
    }
}
