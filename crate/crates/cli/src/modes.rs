use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use polyhom_core::fem::{
    corner_probe, lp_error, solve_dirichlet, triangulate, BoundaryData, CoefficientField,
    DirichletProblem, SolverConfig,
};
use polyhom_core::geometry::{certify_polytope, diophantine_check, lattice_partition, ConvexPolytope};
use polyhom_core::harness::{
    fit_rate, probe_points_on_face, rate_report, run_sweep, theoretical_rates, ProbePoint,
    SweepConfig,
};
use polyhom_core::oscillatory::{
    decay_envelope, equidistribution_table, patch_integral_closed_form, patch_integral_quadrature,
    patch_measure, FacePatch, QuadratureBudget,
};
use polyhom_core::periodic::PeriodicFunction;
use polyhom_core::report::{
    gnuplot_data, gnuplot_script, sweep_summary_json, write_envelope_csv,
    write_equidistribution_csv, write_sweep_csv,
};
use polyhom_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::artifacts::{Artifacts, SCHEMA};
use crate::config::{load, FunctionSource, Loaded, PolytopeSource};
use crate::error::{core, CliError};
use crate::Mode;

/// Runs one mode end to end and returns the text printed on success.
pub fn run(mode: Mode, config: &Path, out: &Path, seed: u64) -> Result<String, CliError> {
    let (arts, summary, hash) = match mode {
        Mode::Dioph => dioph(load(config)?, seed)?,
        Mode::Partition => partition(load(config)?, seed)?,
        Mode::Osc => osc(load(config)?, seed)?,
        Mode::Equi => equi(load(config)?, seed)?,
        Mode::Solve => solve(load(config)?, seed)?,
        Mode::Sweep => sweep(load(config)?, seed)?,
        Mode::Corner => corner(load(config)?, seed)?,
        Mode::Report => report(load(config)?, seed)?,
    };
    let warnings = arts.warnings.len();
    arts.commit(out, mode.name(), seed, &hash)?;
    let mut s = summary;
    if warnings > 0 {
        let _ = write!(s, "\n{warnings} warning(s) recorded in the manifest");
    }
    Ok(s)
}

type ModeOutput = (Artifacts, String, String);

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<(), polyhom_core::Error>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn polytope<T>(l: &mut Loaded<T>, src: &PolytopeSource, arts: &mut Artifacts) -> Result<ConvexPolytope, CliError> {
    let (poly, warnings) = l.polytope(src)?;
    for w in warnings {
        arts.warn(w);
    }
    Ok(poly)
}

/// Records a warning for every face whose normal fails the lattice search.
fn diophantine_warning(poly: &ConvexPolytope, tau: f64, bound: u64, arts: &mut Artifacts) -> Result<(), CliError> {
    let cert = certify_polytope(poly, tau, bound).map_err(core)?;
    let rational = cert.rational_faces();
    if !rational.is_empty() {
        arts.warn(format!("non-Diophantine normal on faces {rational:?}"));
    }
    Ok(())
}

fn smoothness(g: &PeriodicFunction, tau: f64, arts: &mut Artifacts) {
    if let Some(w) = g.smoothness_warning(tau) {
        arts.warn(w);
    }
}

/// `ε`-scaled boundary data `g(x/ε)`; only real-valued `g` is accepted.
fn scaled_data(g: &PeriodicFunction, eps: f64) -> Result<BoundaryData, CliError> {
    if !g.is_real_valued() {
        return Err(invalid("boundary function must be real-valued"));
    }
    if g.dim() != 2 {
        return Err(invalid(format!("boundary function must be 2-periodic in 2 variables, got dimension {}", g.dim())));
    }
    let g = g.clone();
    Ok(BoundaryData::function(move |p| g.evaluate_real(&[p[0] / eps, p[1] / eps])))
}

#[derive(Serialize)]
struct Wrapped<'a, T: Serialize> {
    schema: u32,
    seed: u64,
    #[serde(flatten)]
    body: &'a T,
}

fn add_json<T: Serialize>(arts: &mut Artifacts, name: &str, seed: u64, body: &T) -> Result<(), CliError> {
    arts.add_json(name, &Wrapped { schema: SCHEMA, seed, body })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiophParams {
    normal: Option<Vec<f64>>,
    polytope: Option<PolytopeSource>,
    tau: f64,
    bound: u64,
}

fn dioph(mut l: Loaded<DiophParams>, seed: u64) -> Result<ModeOutput, CliError> {
    let mut arts = Artifacts::new();
    let (tau, bound) = (l.params.tau, l.params.bound);
    if !(tau > 0.0) || bound == 0 {
        return Err(invalid("tau must be positive and bound at least 1"));
    }
    let (faces, summary) = match (l.params.normal.clone(), l.params.polytope.clone()) {
        (Some(nu), None) => {
            let n = nu.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nu.len() < 2 || !(n > 0.0) || !n.is_finite() {
                return Err(invalid("normal must be a nonzero vector of length at least 2"));
            }
            if (n - 1.0).abs() > 1e-12 {
                arts.warn(format!("normal renormalized (|nu| = {n})"));
            }
            let unit: Vec<f64> = nu.iter().map(|x| x / n).collect();
            let cert = diophantine_check(&unit, tau, bound);
            let s = format!("c_lower={} worst_m={:?}", cert.c_lower, cert.worst_m);
            (vec![(None, cert)], s)
        }
        (None, Some(src)) => {
            let poly = polytope(&mut l, &src, &mut arts)?;
            let cert = certify_polytope(&poly, tau, bound).map_err(core)?;
            let rational = cert.rational_faces();
            if !rational.is_empty() {
                arts.warn(format!("non-Diophantine normal on faces {rational:?}"));
            }
            let worst = &cert.faces.iter().find(|(i, _)| *i == cert.worst_face).expect("worst face listed").1;
            let s = format!(
                "c_lower={} worst_m={:?} worst_face={}",
                cert.c_lower, worst.worst_m, cert.worst_face
            );
            (cert.faces.into_iter().map(|(i, c)| (Some(i), c)).collect(), s)
        }
        _ => return Err(invalid("give exactly one of \"normal\" or \"polytope\"")),
    };
    #[derive(Serialize)]
    struct Row {
        face: Option<usize>,
        #[serde(flatten)]
        cert: polyhom_core::geometry::DiophantineCert,
    }
    #[derive(Serialize)]
    struct Body {
        certificates: Vec<Row>,
    }
    let body = Body {
        certificates: faces.into_iter().map(|(face, cert)| Row { face, cert }).collect(),
    };
    add_json(&mut arts, "dioph.json", seed, &body)?;
    Ok((arts, summary, l.hash()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PartitionParams {
    polytope: PolytopeSource,
    face: usize,
    axis: usize,
    rho: f64,
}

fn partition(mut l: Loaded<PartitionParams>, seed: u64) -> Result<ModeOutput, CliError> {
    let mut arts = Artifacts::new();
    let src = l.params.polytope.clone();
    let poly = polytope(&mut l, &src, &mut arts)?;
    let p = &l.params;
    let face = poly
        .face(p.face)
        .ok_or_else(|| invalid(format!("half-space {} has no face", p.face)))?;
    let part = lattice_partition(face, p.axis, p.rho).map_err(core)?;
    let mut csv = String::from("kind,index,lattice_index,measure\n");
    for (i, c) in part.cells.iter().enumerate() {
        let idx: Vec<String> = c.lattice_index.iter().map(i64::to_string).collect();
        let _ = writeln!(csv, "cell,{i},{},{}", idx.join(";"), c.piece.measure);
    }
    for (i, piece) in part.leftover.iter().enumerate() {
        let _ = writeln!(csv, "leftover,{i},,{}", piece.measure);
    }
    #[derive(Serialize)]
    struct Body<'a> {
        face_measure: f64,
        cells_measure: f64,
        leftover_measure: f64,
        expected_cell_measure: f64,
        cell_diameter_bound: f64,
        leftover_in_strip: bool,
        partition: &'a polyhom_core::geometry::FacePartition,
    }
    let body = Body {
        face_measure: part.face_measure,
        cells_measure: part.cells_measure(),
        leftover_measure: part.leftover_measure(),
        expected_cell_measure: part.expected_cell_measure(),
        cell_diameter_bound: part.cell_diameter_bound(),
        leftover_in_strip: part.leftover_in_strip(),
        partition: &part,
    };
    arts.add("partition.csv", csv.into_bytes());
    add_json(&mut arts, "partition.json", seed, &body)?;
    let summary = format!(
        "cells={} cells_measure={} leftover_measure={} face_measure={}",
        part.cells.len(),
        body.cells_measure,
        body.leftover_measure,
        part.face_measure
    );
    Ok((arts, summary, l.hash()))
}

fn default_tau() -> f64 {
    1.0
}

fn default_quadrature_tol() -> f64 {
    1e-10
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OscParams {
    normal: Vec<f64>,
    offset: f64,
    axis: usize,
    bounds: Vec<(f64, f64)>,
    m: Vec<i64>,
    lambdas: Vec<f64>,
    #[serde(default = "default_tau")]
    tau: f64,
    /// Number of grid frequencies, drawn with the run's seed, at which the
    /// closed form is cross-checked by quadrature.
    #[serde(default)]
    quadrature_samples: usize,
    #[serde(default = "default_quadrature_tol")]
    quadrature_tol: f64,
}

fn osc(l: Loaded<OscParams>, seed: u64) -> Result<ModeOutput, CliError> {
    let mut arts = Artifacts::new();
    let p = &l.params;
    if p.lambdas.is_empty() {
        return Err(invalid("lambdas must not be empty"));
    }
    let patch = FacePatch::new(p.normal.clone(), p.offset, p.axis, p.bounds.clone()).map_err(core)?;
    let env = decay_envelope(&patch, &p.m, &p.lambdas, p.tau).map_err(core)?;
    #[derive(Serialize)]
    struct Check {
        lambda: f64,
        closed_form: Complex64,
        quadrature: Complex64,
        abs_diff: f64,
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    for _ in 0..p.quadrature_samples {
        let lambda = p.lambdas[rng.random_range(0..p.lambdas.len())];
        let cf = patch_integral_closed_form(&patch, lambda, &p.m).map_err(core)?.value;
        let q = patch_integral_quadrature(&patch, lambda, &p.m, p.quadrature_tol, QuadratureBudget::default())
            .map_err(core)?
            .value;
        checks.push(Check {
            lambda,
            closed_form: cf,
            quadrature: q,
            abs_diff: (cf - q).norm(),
        });
    }
    #[derive(Serialize)]
    struct Body<'a> {
        patch_measure: f64,
        envelope: &'a polyhom_core::oscillatory::DecayEnvelope,
        growth: f64,
        quadrature_checks: Vec<Check>,
    }
    let growth = env.growth();
    arts.add("envelope.csv", csv_bytes(|b| write_envelope_csv(&env.per_lambda, b))?);
    let worst = checks.iter().map(|c| c.abs_diff).fold(0.0, f64::max);
    let body = Body {
        patch_measure: patch_measure(&patch),
        envelope: &env,
        growth,
        quadrature_checks: checks,
    };
    add_json(&mut arts, "osc.json", seed, &body)?;
    let mut summary = format!("sup_ratio={} growth={growth}", env.sup_ratio);
    if p.quadrature_samples > 0 {
        let _ = write!(summary, " max_quadrature_diff={worst:e}");
    }
    Ok((arts, summary, l.hash()))
}

fn default_bound() -> u64 {
    200
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EquiParams {
    polytope: PolytopeSource,
    function: FunctionSource,
    lambdas: Vec<f64>,
    #[serde(default)]
    face: Option<usize>,
    #[serde(default = "default_tau")]
    tau: f64,
    /// Lattice search bound for the Diophantine warning.
    #[serde(default = "default_bound")]
    bound: u64,
}

fn equi(mut l: Loaded<EquiParams>, seed: u64) -> Result<ModeOutput, CliError> {
    let mut arts = Artifacts::new();
    let (psrc, fsrc) = (l.params.polytope.clone(), l.params.function.clone());
    let poly = polytope(&mut l, &psrc, &mut arts)?;
    let g = l.function(&fsrc)?;
    let p = &l.params;
    diophantine_warning(&poly, p.tau, p.bound, &mut arts)?;
    smoothness(&g, p.tau, &mut arts);
    let rows = equidistribution_table(&poly, &g, &p.lambdas, p.face).map_err(core)?;
    arts.add("equi.csv", csv_bytes(|b| write_equidistribution_csv(&rows, b))?);
    #[derive(Serialize)]
    struct Body<'a> {
        mean: Complex64,
        face: Option<usize>,
        rows: &'a [polyhom_core::oscillatory::EquiRow],
    }
    add_json(
        &mut arts,
        "equi.json",
        seed,
        &Body {
            mean: g.mean(),
            face: p.face,
            rows: &rows,
        },
    )?;
    let max_scaled = rows.iter().map(|r| r.scaled).fold(0.0, f64::max);
    let max_dev = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    Ok((
        arts,
        format!("rows={} max_deviation={max_dev} max_scaled={max_scaled}", rows.len()),
        l.hash(),
    ))
}

/// Constant coefficient matrices; the identity is the default.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum CoefficientSpec {
    Diagonal { diagonal: (f64, f64) },
    Matrix { matrix: [[f64; 2]; 2], ellipticity: f64 },
}

fn coefficient(spec: &Option<CoefficientSpec>, poly: &ConvexPolytope) -> Result<CoefficientField, CliError> {
    let c = match spec {
        None => CoefficientField::Identity,
        Some(CoefficientSpec::Diagonal { diagonal: (a, b) }) => {
            if !(*a > 0.0 && *b > 0.0) {
                return Err(invalid("diagonal coefficients must be positive"));
            }
            CoefficientField::diagonal(*a, *b)
        }
        Some(CoefficientSpec::Matrix { matrix, ellipticity }) => CoefficientField::Constant {
            a: *matrix,
            c: *ellipticity,
        },
    };
    c.validate(poly).map_err(core)?;
    Ok(c)
}

fn default_p_values() -> Vec<f64> {
    vec![1.0, 2.0]
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SolveParams {
    polytope: PolytopeSource,
    function: FunctionSource,
    epsilon: f64,
    h: f64,
    #[serde(default)]
    coefficient: Option<CoefficientSpec>,
    #[serde(default = "default_p_values")]
    p_values: Vec<f64>,
    #[serde(default)]
    solver: SolverConfig,
}

fn solve(mut l: Loaded<SolveParams>, seed: u64) -> Result<ModeOutput, CliError> {
    let mut arts = Artifacts::new();
    let (psrc, fsrc) = (l.params.polytope.clone(), l.params.function.clone());
    let poly = polytope(&mut l, &psrc, &mut arts)?;
    let g = l.function(&fsrc)?;
    let p = &l.params;
    if !(p.epsilon > 0.0) || !(p.h > 0.0) {
        return Err(invalid("epsilon and h must be positive"));
    }
    if let Some(bad) = p.p_values.iter().find(|&&q| !(q >= 1.0)) {
        return Err(invalid(format!("p must be at least 1, got {bad}")));
    }
    let coef = coefficient(&p.coefficient, &poly)?;
    let mesh = triangulate(&poly, p.h, 0.0).map_err(core)?;
    let h_used = mesh.max_edge();
    let problem = DirichletProblem {
        polygon: poly.clone(),
        coefficient: coef,
        data: scaled_data(&g, p.epsilon)?,
    };
    let sol = solve_dirichlet(&problem, mesh, p.solver).map_err(core)?;
    let gbar = g.mean().re;
    let lp: Vec<(f64, f64)> = p.p_values.iter().map(|&q| (q, lp_error(&sol, gbar, q))).collect();
    let mut csv = Vec::new();
    sol.write_csv(&mut csv)
        .map_err(|e| invalid(format!("cannot format solution: {e}")))?;
    arts.add("solution.csv", csv);
    #[derive(Serialize)]
    struct Body<'a> {
        epsilon: f64,
        h_used: f64,
        n_vertices: usize,
        gbar: f64,
        lp_errors: &'a [(f64, f64)],
        max_principle_violation: f64,
        stats: polyhom_core::fem::SolverStats,
    }
    let body = Body {
        epsilon: p.epsilon,
        h_used,
        n_vertices: sol.mesh.n_vertices(),
        gbar,
        lp_errors: &lp,
        max_principle_violation: sol.max_principle_violation(),
        stats: sol.stats,
    };
    add_json(&mut arts, "solve.json", seed, &body)?;
    let errs: Vec<String> = lp.iter().map(|(q, v)| format!("L{q}={v}")).collect();
    let summary = format!(
        "vertices={} iterations={} {}",
        body.n_vertices,
        sol.stats.iterations,
        errs.join(" ")
    );
    Ok((arts, summary, l.hash()))
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum ProbeSpec {
    OnFace { face: usize, distances: Vec<f64> },
    Points(Vec<ProbePoint>),
}

fn default_oversampling() -> f64 {
    10.0
}

fn default_delta() -> f64 {
    0.01
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepParams {
    polytope: PolytopeSource,
    function: FunctionSource,
    epsilons: Vec<f64>,
    p_values: Vec<f64>,
    probes: ProbeSpec,
    #[serde(default)]
    coefficient: Option<CoefficientSpec>,
    #[serde(default = "default_oversampling")]
    oversampling: f64,
    #[serde(default = "default_delta")]
    delta: f64,
    #[serde(default)]
    solver: SolverConfig,
    #[serde(default)]
    vertex_cap: Option<usize>,
    #[serde(default = "default_tau")]
    tau: f64,
}

fn sweep(mut l: Loaded<SweepParams>, _seed: u64) -> Result<ModeOutput, CliError> {
    let mut arts = Artifacts::new();
    let (psrc, fsrc) = (l.params.polytope.clone(), l.params.function.clone());
    let poly = polytope(&mut l, &psrc, &mut arts)?;
    let g = l.function(&fsrc)?;
    let p = &l.params;
    if !g.is_real_valued() {
        return Err(invalid("boundary function must be real-valued"));
    }
    smoothness(&g, p.tau, &mut arts);
    let coef = coefficient(&p.coefficient, &poly)?;
    let probes = match &p.probes {
        ProbeSpec::OnFace { face, distances } => probe_points_on_face(&poly, *face, distances).map_err(core)?,
        ProbeSpec::Points(pts) => pts.clone(),
    };
    let mut cfg = SweepConfig::new(p.epsilons.clone(), p.p_values.clone(), probes);
    cfg.oversampling = p.oversampling;
    cfg.delta = p.delta;
    cfg.solver = p.solver;
    if let Some(cap) = p.vertex_cap {
        cfg.vertex_cap = cap;
    }
    let result = run_sweep(&poly, &coef, &g, &cfg).map_err(core)?;
    for w in &result.warnings {
        arts.warn(w.clone());
    }
    for r in result.records.iter().filter(|r| r.failure.is_some()) {
        arts.warn(format!("epsilon {} failed: {}", r.epsilon, r.failure.as_deref().unwrap_or("")));
    }
    if result.successful().count() == 0 {
        return Err(CliError::Numerical("every epsilon failed".into()));
    }
    let report = rate_report(&poly, &result).map_err(core)?;
    arts.add("sweep.csv", csv_bytes(|b| write_sweep_csv(&result, b))?);
    arts.add("sweep.json", sweep_summary_json(&result, Some(&report))?.into_bytes());
    arts.add("sweep.dat", gnuplot_data(&result).into_bytes());
    arts.add("sweep.gp", gnuplot_script(&result, "sweep.dat").into_bytes());
    let mut summary = format!("alpha_star={} gamma={}", report.alpha_star, report.gamma);
    for f in &report.lp {
        match &f.fit {
            Some(fit) => {
                let _ = write!(summary, " L{}={:.4}", f.p, fit.exponent);
            }
            None => {
                let _ = write!(summary, " L{}=n/a", f.p);
            }
        }
    }
    let _ = write!(summary, " pass={}", report.pass);
    Ok((arts, summary, l.hash()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CornerParams {
    omegas: Vec<f64>,
    h: f64,
    #[serde(default)]
    solver: SolverConfig,
}

fn corner(l: Loaded<CornerParams>, seed: u64) -> Result<ModeOutput, CliError> {
    let mut arts = Artifacts::new();
    let p = &l.params;
    if p.omegas.is_empty() {
        return Err(invalid("omegas must not be empty"));
    }
    let mut probes = Vec::new();
    for &omega in &p.omegas {
        probes.push(corner_probe(omega, p.h, p.solver).map_err(core)?);
    }
    let mut csv = String::from("omega,r,value,gradient\n");
    let mut summary = Vec::new();
    for c in &probes {
        for ((r, v), g) in c.radii.iter().zip(&c.values).zip(&c.gradients) {
            let _ = writeln!(csv, "{},{r},{v},{g}", c.omega);
        }
        summary.push(format!(
            "omega={:.6} u_exp={:.4} (pi/omega={:.4}) grad_exp={:.4}",
            c.omega,
            c.solution_exponent,
            std::f64::consts::PI / c.omega,
            c.gradient_exponent
        ));
    }
    arts.add("corner.csv", csv.into_bytes());
    #[derive(Serialize)]
    struct Body<'a> {
        h: f64,
        probes: &'a [polyhom_core::fem::CornerProbe],
    }
    add_json(&mut arts, "corner.json", seed, &Body { h: p.h, probes: &probes })?;
    Ok((arts, summary.join("\n"), l.hash()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportParams {
    /// A sweep CSV produced by the `sweep` mode.
    sweep_csv: String,
    /// When given, theoretical exponents are attached to `L^p` series.
    #[serde(default)]
    polytope: Option<PolytopeSource>,
    #[serde(default = "default_delta")]
    delta: f64,
}

fn report(mut l: Loaded<ReportParams>, seed: u64) -> Result<ModeOutput, CliError> {
    let mut arts = Artifacts::new();
    let rel = l.params.sweep_csv.clone();
    let text = l.read_input(&rel)?;
    let series = parse_sweep_csv(&text).map_err(|e| invalid(format!("{rel}: {e}")))?;
    let alpha = match l.params.polytope.clone() {
        Some(src) => {
            let poly = polytope(&mut l, &src, &mut arts)?;
            Some((poly.dim(), poly.max_adjacent_angle().map_err(core)?.alpha_star))
        }
        None => None,
    };
    #[derive(Serialize)]
    struct SeriesFit {
        series: String,
        fit: Option<polyhom_core::harness::RateFit>,
        error: Option<String>,
        theory: Option<polyhom_core::harness::TheoreticalRates>,
    }
    let mut fits = Vec::new();
    let mut csv = String::from("series,exponent,stderr,intercept,n_points,dropped\n");
    for (name, pts) in &series {
        let theory = match (alpha, name.strip_prefix("p=").and_then(|s| s.parse::<f64>().ok())) {
            (Some((d, a)), Some(p)) => Some(theoretical_rates(d, a, p, l.params.delta).map_err(core)?),
            _ => None,
        };
        match fit_rate(pts) {
            Ok(f) => {
                let dropped = f.dropped.map(|e| e.to_string()).unwrap_or_default();
                let _ = writeln!(
                    csv,
                    "{name},{},{},{},{},{dropped}",
                    f.exponent, f.stderr, f.intercept, f.n_points
                );
                fits.push(SeriesFit {
                    series: name.clone(),
                    fit: Some(f),
                    error: None,
                    theory,
                });
            }
            Err(e) => {
                arts.warn(format!("series {name}: {e}"));
                fits.push(SeriesFit {
                    series: name.clone(),
                    fit: None,
                    error: Some(e.to_string()),
                    theory,
                });
            }
        }
    }
    if fits.iter().all(|f| f.fit.is_none()) {
        return Err(CliError::Numerical("no series could be fitted".into()));
    }
    arts.add("rates.csv", csv.into_bytes());
    #[derive(Serialize)]
    struct Body<'a> {
        source: &'a str,
        delta: f64,
        series: &'a [SeriesFit],
    }
    add_json(
        &mut arts,
        "rates.json",
        seed,
        &Body {
            source: &rel,
            delta: l.params.delta,
            series: &fits,
        },
    )?;
    let summary: Vec<String> = fits
        .iter()
        .map(|f| match &f.fit {
            Some(fit) => format!("{}: {:.4}", f.series, fit.exponent),
            None => format!("{}: n/a", f.series),
        })
        .collect();
    Ok((arts, summary.join("\n"), l.hash()))
}

/// Groups `(ε, value)` pairs by series label, in order of first
/// appearance.
fn parse_sweep_csv(text: &str) -> Result<Vec<(String, Vec<(f64, f64)>)>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    if header != polyhom_core::report::SWEEP_CSV_HEADER {
        return Err(format!("unexpected header {header:?}"));
    }
    let mut order = Vec::new();
    let mut groups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for (i, line) in lines.enumerate() {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(format!("line {}: expected 6 columns", i + 2));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| format!("line {}: {e}", i + 2));
        let (eps, v) = (num(cols[0])?, num(cols[2])?);
        let key = cols[1].to_string();
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push((eps, v));
    }
    Ok(order
        .into_iter()
        .map(|k| {
            let v = groups.remove(&k).expect("grouped");
            (k, v)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_csv_groups_in_first_seen_order() {
        let text = format!(
            "{}\n0.5,p=2,0.1,0.05,3,1e-12\n0.5,d0.1,0.2,0.05,3,1e-12\n0.25,p=2,0.07,0.025,3,1e-12\n",
            polyhom_core::report::SWEEP_CSV_HEADER
        );
        let s = parse_sweep_csv(&text).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].0, "p=2");
        assert_eq!(s[0].1, vec![(0.5, 0.1), (0.25, 0.07)]);
        assert_eq!(s[1].0, "d0.1");
    }

    #[test]
    fn bad_header_is_rejected() {
        assert!(parse_sweep_csv("a,b\n").is_err());
        assert!(parse_sweep_csv("").is_err());
    }

    #[test]
    fn coefficient_specs_parse() {
        let d: CoefficientSpec = serde_json::from_str(r#"{"diagonal": [2, 1]}"#).unwrap();
        assert!(matches!(d, CoefficientSpec::Diagonal { .. }));
        let m: CoefficientSpec =
            serde_json::from_str(r#"{"matrix": [[2, 0.5], [0.5, 1]], "ellipticity": 3}"#).unwrap();
        assert!(matches!(m, CoefficientSpec::Matrix { .. }));
        let sq = ConvexPolytope::unit_square();
        assert!(coefficient(&Some(CoefficientSpec::Diagonal { diagonal: (-1.0, 1.0) }), &sq).is_err());
    }
}
