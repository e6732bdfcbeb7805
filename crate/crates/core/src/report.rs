//! Deterministic CSV, JSON and gnuplot emission for sweeps and tables.
//!
//! Numbers are written with Rust's shortest round-trip formatting, rows
//! follow input order, and no timestamps or host data are embedded, so equal
//! inputs give byte-identical files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::harness::{RateReport, SweepResult};
use crate::oscillatory::{EnvelopeRow, EquiRow};
use crate::Error;

pub const SWEEP_CSV_HEADER: &str = "epsilon,p_or_probe_id,value,h_used,solver_iters,residual";

/// Version of the JSON summary layout.
pub const SCHEMA_VERSION: u32 = 1;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Serialization(e.to_string())
}

/// Label of an `L^p` row in the sweep CSV.
pub fn p_label(p: f64) -> String {
    format!("p={p}")
}

/// One row per `(ε, p)` followed by one row per `(ε, probe)`; failed ε
/// values contribute no rows.
pub fn write_sweep_csv<W: Write>(result: &SweepResult, w: W) -> Result<(), Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SWEEP_CSV_HEADER.split(','))
        .map_err(csv_err)?;
    for r in result.successful() {
        let tail = [
            r.h_used.to_string(),
            r.solver_iters.to_string(),
            r.residual.to_string(),
        ];
        for (p, v) in &r.lp {
            out.write_record(
                [r.epsilon.to_string(), p_label(*p), v.to_string()]
                    .iter()
                    .chain(&tail),
            )
            .map_err(csv_err)?;
        }
        for (id, v) in &r.pointwise {
            out.write_record(
                [r.epsilon.to_string(), id.clone(), v.to_string()]
                    .iter()
                    .chain(&tail),
            )
            .map_err(csv_err)?;
        }
    }
    out.flush().map_err(|e| Error::Serialization(e.to_string()))
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    schema: u32,
    sweep: &'a SweepResult,
    report: Option<&'a RateReport>,
}

pub fn sweep_summary_json(result: &SweepResult, report: Option<&RateReport>) -> Result<String, Error> {
    let summary = SweepSummary {
        schema: SCHEMA_VERSION,
        sweep: result,
        report,
    };
    let mut s = serde_json::to_string_pretty(&summary).map_err(|e| Error::Serialization(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Whitespace-separated `epsilon value` columns, one block per series
/// (separated by two blank lines, gnuplot's `index` convention).
pub fn gnuplot_data(result: &SweepResult) -> String {
    let mut s = String::new();
    let mut block = |title: &str, series: Vec<(f64, f64)>| {
        if !s.is_empty() {
            s.push_str("\n\n");
        }
        s.push_str(&format!("# {title}\n# epsilon value\n"));
        for (e, v) in series {
            s.push_str(&format!("{e} {v}\n"));
        }
    };
    for &p in &result.config.p_values {
        block(&p_label(p), result.lp_series(p));
    }
    for (id, _, _) in &result.probes {
        block(id, result.pointwise_series(id));
    }
    s
}

/// Log-log plot script for [`gnuplot_data`] stored as `data_file`.
pub fn gnuplot_script(result: &SweepResult, data_file: &str) -> String {
    let mut titles: Vec<String> = result.config.p_values.iter().map(|&p| p_label(p)).collect();
    titles.extend(result.probes.iter().map(|(id, _, _)| id.clone()));
    let plots: Vec<String> = titles
        .iter()
        .enumerate()
        .map(|(i, t)| format!("'{data_file}' index {i} using 1:2 with linespoints title '{t}'"))
        .collect();
    format!(
        "set logscale xy\nset xlabel 'epsilon'\nset ylabel 'error'\nset key left top\nplot {}\n",
        plots.join(", \\\n     ")
    )
}

/// Writes `sweep.csv`, `sweep.json`, `sweep.dat` and `sweep.gp` into `dir`
/// and returns their paths in that order.
pub fn write_sweep_report(
    dir: &Path,
    result: &SweepResult,
    report: Option<&RateReport>,
) -> Result<Vec<PathBuf>, Error> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let csv_path = dir.join("sweep.csv");
    let mut buf = Vec::new();
    write_sweep_csv(result, &mut buf)?;
    fs::write(&csv_path, buf).map_err(io_err(&csv_path))?;
    let json_path = dir.join("sweep.json");
    fs::write(&json_path, sweep_summary_json(result, report)?).map_err(io_err(&json_path))?;
    let dat_path = dir.join("sweep.dat");
    fs::write(&dat_path, gnuplot_data(result)).map_err(io_err(&dat_path))?;
    let gp_path = dir.join("sweep.gp");
    fs::write(&gp_path, gnuplot_script(result, "sweep.dat")).map_err(io_err(&gp_path))?;
    Ok(vec![csv_path, json_path, dat_path, gp_path])
}

/// Columns `lambda,re,im,deviation,scaled`.
pub fn write_equidistribution_csv<W: Write>(rows: &[EquiRow], w: W) -> Result<(), Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["lambda", "re", "im", "deviation", "scaled"])
        .map_err(csv_err)?;
    for r in rows {
        out.write_record([
            r.lambda.to_string(),
            r.value.re.to_string(),
            r.value.im.to_string(),
            r.deviation.to_string(),
            r.scaled.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush().map_err(|e| Error::Serialization(e.to_string()))
}

/// Columns `lambda,re,im,abs,ratio`.
pub fn write_envelope_csv<W: Write>(rows: &[EnvelopeRow], w: W) -> Result<(), Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["lambda", "re", "im", "abs", "ratio"])
        .map_err(csv_err)?;
    for r in rows {
        out.write_record([
            r.lambda.to_string(),
            r.value.re.to_string(),
            r.value.im.to_string(),
            r.abs.to_string(),
            r.ratio.to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush().map_err(|e| Error::Serialization(e.to_string()))
}
