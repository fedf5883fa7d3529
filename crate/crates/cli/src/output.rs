//! Deterministic CSV and JSON artifact writers.
//!
//! Every floating-point value is serialized with 17 significant digits,
//! so identical scenarios produce byte-identical files.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

use tanklab_core::model::TimeSeriesRecord;

/// 17 significant digits (1 leading + 16 fractional).
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

const NONLINEAR_HEADER: &str = "t,xi,w,f,V,E,W,h_min,h_max,mass,norm_X";
const LINEAR_HEADER: &str = "t,xi,w,f,P,Wtilde,phi_mean,phit_mean";

pub fn write_nonlinear_csv(path: &Path, records: &[TimeSeriesRecord]) -> Result<()> {
    let mut out = String::with_capacity(records.len() * 200);
    out.push_str(NONLINEAR_HEADER);
    out.push('\n');
    for r in records {
        let cols = [
            r.t,
            r.xi,
            r.w,
            r.f,
            r.v_lyap.unwrap_or(f64::NAN),
            r.e_energy.unwrap_or(f64::NAN),
            r.w_energy.unwrap_or(f64::NAN),
            r.h_min.unwrap_or(f64::NAN),
            r.h_max.unwrap_or(f64::NAN),
            r.mass.unwrap_or(f64::NAN),
            r.norm_x.unwrap_or(f64::NAN),
        ];
        out.push_str(&cols.map(fmt).join(","));
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_linear_csv(path: &Path, records: &[TimeSeriesRecord]) -> Result<()> {
    let mut out = String::with_capacity(records.len() * 160);
    out.push_str(LINEAR_HEADER);
    out.push('\n');
    for r in records {
        let cols = [
            r.t,
            r.xi,
            r.w,
            r.f,
            r.p_norm.unwrap_or(f64::NAN),
            r.w_tilde.unwrap_or(f64::NAN),
            r.phi_mean.unwrap_or(f64::NAN),
            r.phit_mean.unwrap_or(f64::NAN),
        ];
        out.push_str(&cols.map(fmt).join(","));
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file =
        fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let text = serde_json::to_string_pretty(value)?;
    file.write_all(text.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}
