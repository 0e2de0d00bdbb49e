//! Report files: a time-series CSV, a JSON run summary and binary field snapshots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use mpnls::grid::write_field;
use mpnls::linear::{DispersiveReport, StrichartzReport};
use mpnls::norms::{lebesgue_norm, mass, energy, sobolev_norm};
use mpnls::{EllipticSymbol, Nonlinearity, Trajectory};
use serde::Serialize;

use crate::config::{Exponent, SolveConfig};
use crate::{io_error, CliError};

pub const TIME_SERIES_FILE: &str = "timeseries.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const DISPERSIVE_FILE: &str = "dispersive.csv";
pub const STRICHARTZ_FILE: &str = "strichartz.csv";
pub const TIME_SERIES_HEADER: &str = "t,mass,energy,l2,linf,sobolev_s,multipoint_residual";

pub fn generated_by() -> String {
    format!("mpnls {}", env!("CARGO_PKG_VERSION"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesRow {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub l2: f64,
    pub linf: f64,
    pub sobolev_s: f64,
    pub multipoint_residual: f64,
}

/// Per-frame diagnostics; `residual` is repeated on every row.
pub fn time_series<N: Nonlinearity>(
    traj: &Trajectory,
    symbol: &EllipticSymbol,
    nl: &N,
    s: f64,
    residual: f64,
) -> mpnls::Result<Vec<TimeSeriesRow>> {
    traj.frames()
        .iter()
        .enumerate()
        .map(|(m, u)| {
            Ok(TimeSeriesRow {
                t: traj.time(m),
                mass: mass(u),
                energy: energy(u, symbol, nl)?,
                l2: lebesgue_norm(u, 2.0)?,
                linf: lebesgue_norm(u, f64::INFINITY)?,
                sobolev_s: sobolev_norm(u, s, true, 2.0)?,
                multipoint_residual: residual,
            })
        })
        .collect()
}

/// Run summary; keys serialize in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub version: String,
    pub config_echo: serde_json::Value,
    pub s_c: Option<f64>,
    pub class: Option<String>,
    pub eta: Option<f64>,
    pub iterations: Option<usize>,
    pub d_history: Vec<f64>,
    pub contraction_ratios: Vec<f64>,
    pub final_residual: Option<f64>,
    pub mass_drift: f64,
    pub energy_drift: f64,
    pub min_abs_denominator: f64,
    pub strichartz_pairs: Vec<String>,
    pub strichartz_value: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunResults {
    pub trajectory: Trajectory,
    pub rows: Vec<TimeSeriesRow>,
    pub summary: Summary,
}

/// Shortest round-trip representation, switching to exponent form for very
/// small or large magnitudes.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e6).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn format_time_series(rows: &[TimeSeriesRow]) -> String {
    let mut out = String::from(TIME_SERIES_HEADER);
    out.push('\n');
    for r in rows {
        let cells = [r.t, r.mass, r.energy, r.l2, r.linf, r.sobolev_s, r.multipoint_residual];
        let line: Vec<String> = cells.iter().map(|&x| format_number(x)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn format_summary(summary: &Summary) -> String {
    let mut text = serde_json::to_string_pretty(summary).expect("summary serializes");
    text.push('\n');
    text
}

/// Per-time quotient rows followed by one `# slope=...` summary line.
pub fn format_dispersive(report: &DispersiveReport) -> String {
    let mut out = String::from("t,norm,quotient,shell_fraction\n");
    for row in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            format_number(row.t),
            format_number(row.norm),
            format_number(row.quotient),
            format_number(row.shell_fraction)
        );
    }
    let slope = report.slope.map_or_else(|| "nan".to_string(), format_number);
    let _ = writeln!(
        out,
        "# slope={slope} p={} dual_norm={} wraparound={}",
        Exponent(report.p),
        format_number(report.dual_norm),
        report.wraparound
    );
    out
}

/// One row per datum followed by one `# max_ratio=...` summary line.
pub fn format_strichartz(report: &StrichartzReport, l2_norms: &[f64]) -> String {
    let mut out = String::from("sample,l2,ratio\n");
    for (k, (ratio, l2)) in report.ratios.iter().zip(l2_norms).enumerate() {
        let _ = writeln!(out, "{k},{},{}", format_number(*l2), format_number(*ratio));
    }
    let pairs: Vec<String> = report.pairs.iter().map(|p| p.to_string()).collect();
    let _ = writeln!(
        out,
        "# max_ratio={} pairs={} wraparound={}",
        format_number(report.max_ratio),
        pairs.join(";"),
        report.wraparound
    );
    out
}

pub(crate) fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(io_error(path))
}

pub(crate) fn ensure_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(io_error(path))
}

pub fn snapshot_name(frame: usize) -> String {
    format!("u_{frame:06}.fld")
}

/// Writes the time series, the summary and any requested snapshots; returns the paths written.
pub fn write_report(results: &RunResults, config: &SolveConfig) -> Result<Vec<PathBuf>, CliError> {
    let dir = &config.outputs.report_path;
    ensure_dir(dir)?;
    let mut written = Vec::new();

    let series = dir.join(TIME_SERIES_FILE);
    write_file(&series, format_time_series(&results.rows).as_bytes())?;
    written.push(series);

    let summary = dir.join(SUMMARY_FILE);
    write_file(&summary, format_summary(&results.summary).as_bytes())?;
    written.push(summary);

    if let Some(fields_dir) = &config.outputs.fields_path {
        ensure_dir(fields_dir)?;
        let nt = results.trajectory.intervals();
        let mut frames = config.outputs.frames.clone().unwrap_or_else(|| vec![0, nt]);
        frames.sort_unstable();
        frames.dedup();
        for m in frames {
            let path = fields_dir.join(snapshot_name(m));
            write_field(&path, results.trajectory.frame(m)).map_err(|e| match e {
                mpnls::Error::Io(source) => CliError::Io { path: path.clone(), source },
                other => CliError::Solver(other),
            })?;
            written.push(path);
        }
    }
    Ok(written)
}
