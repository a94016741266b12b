//! CSV log format.
//!
//! ```text
//! # key=value            (one line per header entry)
//! sample_index,time_ms,phase,setpoint_rpm,measured_rpm,error,duty,interference_rpm,cancellation_rpm
//! 0,0,collect,400,-1.23457,...
//! ```
//!
//! Reals use six significant digits in `%g` style so output is byte-stable.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::experiment::{ExperimentLog, SampleRecord};
use crate::error::{CeedsError, Result};

pub const CSV_COLUMNS: &str = "sample_index,time_ms,phase,setpoint_rpm,measured_rpm,error,duty,interference_rpm,cancellation_rpm";

fn strip_fraction_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Six significant digits, `%g` style: fixed notation for exponents in
/// `[-4, 6)`, scientific otherwise, trailing zeros removed.
pub fn format_real(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        strip_fraction_zeros(&format!("{v:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip_fraction_zeros(mantissa), exp.abs())
    }
}

fn render_row(r: &SampleRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}\n",
        r.sample_index,
        r.time_ms,
        r.phase,
        format_real(r.setpoint_rpm),
        format_real(r.measured_rpm),
        format_real(r.error),
        format_real(r.duty),
        format_real(r.interference_rpm),
        format_real(r.cancellation_rpm),
    )
}

pub fn render_csv(log: &ExperimentLog) -> String {
    let mut out = String::with_capacity(80 * (log.records.len() + log.header.len() + 1));
    for (k, v) in &log.header {
        out.push_str(&format!("# {k}={v}\n"));
    }
    out.push_str(CSV_COLUMNS);
    out.push('\n');
    for r in &log.records {
        out.push_str(&render_row(r));
    }
    out
}

pub fn write_csv(log: &ExperimentLog, path: &Path) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| CeedsError::io(path, e))?;
    file.write_all(render_csv(log).as_bytes())
        .map_err(|e| CeedsError::io(path, e))
}

fn field<T: std::str::FromStr>(parts: &[&str], idx: usize, line: usize) -> Result<T> {
    parts
        .get(idx)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| CeedsError::invalid(format!("line {line}: bad column {idx}")))
}

/// Parses a log written by [`write_csv`]. The chosen cycle and analysis
/// detail are not reconstructed; the header keeps their text form.
pub fn parse_csv(text: &str) -> Result<ExperimentLog> {
    let mut header = Vec::new();
    let mut records = Vec::new();
    let mut seen_columns = false;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if let Some(meta) = line.strip_prefix('#') {
            let (k, v) = meta
                .trim_start()
                .split_once('=')
                .ok_or_else(|| CeedsError::invalid(format!("line {lineno}: header without '='")))?;
            header.push((k.to_string(), v.to_string()));
            continue;
        }
        if !seen_columns {
            if line != CSV_COLUMNS {
                return Err(CeedsError::invalid(format!(
                    "line {lineno}: unexpected column header"
                )));
            }
            seen_columns = true;
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 9 {
            return Err(CeedsError::invalid(format!(
                "line {lineno}: expected 9 columns, found {}",
                parts.len()
            )));
        }
        records.push(SampleRecord {
            sample_index: field(&parts, 0, lineno)?,
            time_ms: field(&parts, 1, lineno)?,
            phase: parts[2].parse()?,
            setpoint_rpm: field(&parts, 3, lineno)?,
            measured_rpm: field(&parts, 4, lineno)?,
            error: field(&parts, 5, lineno)?,
            duty: field(&parts, 6, lineno)?,
            interference_rpm: field(&parts, 7, lineno)?,
            cancellation_rpm: field(&parts, 8, lineno)?,
        });
    }
    if !seen_columns {
        return Err(CeedsError::invalid("missing column header"));
    }
    Ok(ExperimentLog {
        header,
        records,
        chosen: None,
        analysis: None,
    })
}

pub fn read_csv(path: &Path) -> Result<ExperimentLog> {
    let text = fs::read_to_string(path).map_err(|e| CeedsError::io(path, e))?;
    parse_csv(&text)
}
