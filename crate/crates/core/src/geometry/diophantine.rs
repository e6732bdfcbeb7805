use serde::Serialize;

use super::{ConvexPolytope, GeometryError};

/// `|m·ν|` at or below this is treated as an exact lattice annihilation.
pub const DIOPHANTINE_ZERO: f64 = 1e-9;

/// Result of an exhaustive lattice search for a single direction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiophantineCert {
    pub tau: f64,
    pub searched_bound: u64,
    /// `min_{0 < |m|₁ ≤ M} |m·ν|·|m|₁^τ`.
    pub c_lower: f64,
    pub worst_m: Vec<i64>,
}

impl DiophantineCert {
    pub fn is_diophantine(&self) -> bool {
        self.c_lower > 0.0
    }
}

/// Per-face certificates for a polytope; the polytope is reported by its
/// worst face.
#[derive(Clone, Debug, Serialize)]
pub struct PolytopeCertificate {
    /// `(half-space index, certificate)` for each face.
    pub faces: Vec<(usize, DiophantineCert)>,
    pub worst_face: usize,
    pub c_lower: f64,
}

impl PolytopeCertificate {
    pub fn all_diophantine(&self) -> bool {
        self.c_lower > 0.0
    }

    pub fn rational_faces(&self) -> Vec<usize> {
        self.faces
            .iter()
            .filter(|(_, c)| !c.is_diophantine())
            .map(|(i, _)| *i)
            .collect()
    }
}

/// Searches every integer vector `m` with `0 < |m|₁ ≤ bound` for the smallest
/// `|m·ν|·|m|₁^τ`. Only one of `±m` is visited. Shells are scanned in order of
/// increasing `|m|₁`, and ties keep the first vector found, so the reported
/// `worst_m` is reproducible.
pub fn diophantine_check(nu: &[f64], tau: f64, bound: u64) -> DiophantineCert {
    let d = nu.len();
    let mut best = f64::INFINITY;
    let mut worst = vec![0i64; d];
    let mut m = vec![0i64; d];
    for s in 1..=bound {
        let weight = (s as f64).powf(tau);
        visit_shell(&mut m, 0, s as i64, false, &mut |m| {
            let mut v = dot_int(m, nu).abs();
            if v <= DIOPHANTINE_ZERO {
                v = 0.0;
            }
            let score = v * weight;
            if score < best {
                best = score;
                worst.copy_from_slice(m);
            }
        });
    }
    DiophantineCert {
        tau,
        searched_bound: bound,
        c_lower: if best.is_finite() { best } else { 0.0 },
        worst_m: worst,
    }
}

fn dot_int(m: &[i64], nu: &[f64]) -> f64 {
    m.iter().zip(nu).map(|(&a, &b)| a as f64 * b).sum()
}

/// Calls `f` on every `m` with `|m|₁ = remaining` (over positions `pos..`)
/// whose first nonzero component is positive.
fn visit_shell(
    m: &mut [i64],
    pos: usize,
    remaining: i64,
    seen_nonzero: bool,
    f: &mut impl FnMut(&[i64]),
) {
    let d = m.len();
    if pos == d - 1 {
        if remaining == 0 {
            m[pos] = 0;
            if seen_nonzero {
                f(m);
            }
        } else {
            m[pos] = remaining;
            f(m);
            if seen_nonzero {
                m[pos] = -remaining;
                f(m);
            }
        }
        return;
    }
    for a in 0..=remaining {
        if a == 0 {
            m[pos] = 0;
            visit_shell(m, pos + 1, remaining, seen_nonzero, f);
        } else {
            m[pos] = a;
            visit_shell(m, pos + 1, remaining - a, true, f);
            if seen_nonzero {
                m[pos] = -a;
                visit_shell(m, pos + 1, remaining - a, true, f);
            }
        }
    }
}

/// Certifies every face normal separately.
pub fn certify_polytope(
    poly: &ConvexPolytope,
    tau: f64,
    bound: u64,
) -> Result<PolytopeCertificate, GeometryError> {
    if !(tau > 0.0) || bound == 0 {
        return Err(GeometryError::InvalidParameter(
            "tau must be positive and bound at least 1".into(),
        ));
    }
    let mut faces = Vec::with_capacity(poly.faces().len());
    let mut worst = (usize::MAX, f64::INFINITY);
    for f in poly.faces() {
        let cert = diophantine_check(&f.normal, tau, bound);
        if cert.c_lower < worst.1 {
            worst = (f.index, cert.c_lower);
        }
        faces.push((f.index, cert));
    }
    Ok(PolytopeCertificate {
        faces,
        worst_face: worst.0,
        c_lower: worst.1,
    })
}
