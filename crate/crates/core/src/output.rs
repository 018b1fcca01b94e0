//! Data products: CSV tables, JSON documents and atomic file writes.
//!
//! CSV files use `.` as the decimal separator, LF line endings and a fixed
//! header. Floats are printed in Rust's shortest round-trip form.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::device::CurvePoint;
use crate::error::{Error, Result};
use crate::experiment::{StateCurve, StdpWindowResult};
use crate::fitting::{FitRecord, WindowPoint};
use crate::synapse::BranchProbabilities;

/// Writes `contents` to a temporary file beside `path` and renames it into
/// place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn samples_csv(window: &StdpWindowResult) -> String {
    let rows: usize = window.points.iter().map(|p| p.samples.len()).sum();
    let mut out = String::with_capacity(24 * rows + 64);
    out.push_str("delta_t,epoch,delta_g,delta_g_noisy\n");
    for p in &window.points {
        for (e, s) in p.samples.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{}", p.delta_t, e, s.delta_g, s.delta_g_noisy);
        }
    }
    out
}

pub fn summary_csv(window: &StdpWindowResult) -> String {
    let mut out = String::from("delta_t,mean,std,mode,analytic_mean,analytic_mode,tvd\n");
    for p in &window.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.delta_t, p.mean, p.std, p.mode, p.analytic_mean, p.analytic_mode, p.tvd
        );
    }
    out
}

pub fn states_csv(curves: &[StateCurve]) -> String {
    let mut out = String::from("delta_t,g,probability\n");
    for c in curves {
        for (k, w) in c.pmf.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", c.delta_t, c.level(k), w);
        }
    }
    out
}

pub fn curves_csv(curves: &[BranchProbabilities], alphas: &[f64]) -> String {
    let mut out =
        String::from("delta_t,device_index,alpha,v_set_peak,v_reset_peak,p_set,p_reset\n");
    for c in curves {
        for r in &c.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.delta_t,
                r.index,
                alphas[r.index],
                r.v_set_peak,
                r.v_reset_peak,
                r.p_set,
                r.p_reset
            );
        }
    }
    out
}

pub fn device_curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("voltage,p_set,p_reset\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", p.voltage, p.p_set, p.p_reset);
    }
    out
}

pub fn waveform_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("t,voltage\n");
    for (t, v) in points {
        let _ = writeln!(out, "{t},{v}");
    }
    out
}

pub fn fits_json(records: &[FitRecord]) -> String {
    to_json(&records)
}

/// Reads the `delta_t`, `mean` and `mode` columns of a `summary.csv`.
pub fn read_summary(path: &Path) -> Result<Vec<WindowPoint>> {
    let malformed = |message: String| Error::Input {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => malformed(format!("{other:?}")),
    })?;
    let headers = reader
        .headers()
        .map_err(|e| malformed(e.to_string()))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| malformed(format!("missing column `{name}`")))
    };
    let (i_dt, i_mean, i_mode) = (column("delta_t")?, column("mean")?, column("mode")?);
    let mut points = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| malformed(e.to_string()))?;
        let field = |i: usize| -> Result<f64> {
            record
                .get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| {
                    malformed(format!(
                        "row {}: bad number in column {}",
                        line + 2,
                        headers.get(i).unwrap_or("?")
                    ))
                })
        };
        points.push(WindowPoint {
            delta_t: field(i_dt)?,
            mean: field(i_mean)?,
            mode: field(i_mode)?,
        });
    }
    Ok(points)
}
