#![allow(dead_code)]

use std::f64::consts::PI;

use polyhom_core::geometry::ConvexPolytope;
use polyhom_core::periodic::PeriodicFunction;
use rand::Rng;

pub const PHI: f64 = 1.618_033_988_749_895;

/// `cos(2πy₁) + sin(2π(y₁+y₂))`, the standard oscillating test datum.
pub fn golden_g() -> PeriodicFunction {
    PeriodicFunction::cosine(vec![1, 0])
        .add(&PeriodicFunction::sine(vec![1, 1]))
        .unwrap()
}

pub fn golden_normal() -> Vec<f64> {
    let n = (1.0 + PHI * PHI).sqrt();
    vec![1.0 / n, PHI / n]
}

pub fn random_unit<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.2 && n <= 1.0 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Convex polygon with 3 to 8 vertices on a circle of random radius.
pub fn random_polygon<R: Rng>(rng: &mut R) -> ConvexPolytope {
    loop {
        let n = rng.random_range(3..9);
        let mut angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        angles.sort_by(f64::total_cmp);
        let r = rng.random_range(0.3..1.0);
        let c = [rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
        let v: Vec<[f64; 2]> = angles
            .iter()
            .map(|a| [c[0] + r * a.cos(), c[1] + r * a.sin()])
            .collect();
        if let Ok(p) = ConvexPolytope::from_vertices_2d(&v) {
            if p.faces().len() == n {
                return p;
            }
        }
    }
}

/// Uniform point of a polygon by rejection from its bounding box, kept at
/// least `margin` from the boundary.
pub fn interior_point<R: Rng>(rng: &mut R, poly: &ConvexPolytope, margin: f64) -> [f64; 2] {
    let bb = poly.bounding_box().to_vec();
    loop {
        let x = [rng.random_range(bb[0].0..bb[0].1), rng.random_range(bb[1].0..bb[1].1)];
        if poly.contains(&x, 0.0) && poly.distance_to_boundary(&x).unwrap() > margin {
            return x;
        }
    }
}
