//! CSV and report writers. Floats use the shortest round-trip decimal
//! (`ryu`), so identical inputs give identical bytes.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const TRACE_HEADER: [&str; 9] = [
    "k",
    "feasibility",
    "correction_residual",
    "d_norm_sq",
    "contraction_slack",
    "identity_error",
    "dist_H",
    "error_map_sq",
    "error_bound_rhs",
];

pub const ATLAS_HEADER: [&str; 10] = [
    "tau",
    "s",
    "in_G",
    "in_D",
    "lambda_min_G",
    "lambda_min_H",
    "xi",
    "iters_to_tol",
    "r_hat",
    "status",
];

/// One `trace.csv` row; `None` fields are written empty.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub feasibility: f64,
    pub correction_residual: f64,
    pub d_norm_sq: f64,
    pub contraction_slack: Option<f64>,
    pub identity_error: f64,
    pub dist_h: Option<f64>,
    pub error_map_sq: Option<f64>,
    pub error_bound_rhs: Option<f64>,
}

/// One `atlas.csv` row. `iters_to_tol` and `r_hat` are `-1` when the run
/// did not converge, was not attempted, or could not be fitted.
#[derive(Debug, Clone, PartialEq)]
pub struct AtlasRow {
    pub tau: f64,
    pub s: f64,
    pub in_g: bool,
    pub in_d: bool,
    pub lambda_min_g: f64,
    pub lambda_min_h: f64,
    pub xi: Option<f64>,
    pub iters_to_tol: i64,
    pub r_hat: f64,
    pub status: String,
}

/// Shortest round-trip decimal; `NaN`, `inf`, `-inf` otherwise.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        ryu::Buffer::new().format_finite(v).to_string()
    } else {
        v.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub fn write_trace<W: Write>(w: W, rows: &[TraceRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRACE_HEADER).map_err(csv_error)?;
    for r in rows {
        out.write_record([
            r.k.to_string(),
            fmt_f64(r.feasibility),
            fmt_f64(r.correction_residual),
            fmt_f64(r.d_norm_sq),
            opt(r.contraction_slack),
            fmt_f64(r.identity_error),
            opt(r.dist_h),
            opt(r.error_map_sq),
            opt(r.error_bound_rhs),
        ])
        .map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_atlas<W: Write>(w: W, rows: &[AtlasRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(ATLAS_HEADER).map_err(csv_error)?;
    for r in rows {
        out.write_record([
            fmt_f64(r.tau),
            fmt_f64(r.s),
            r.in_g.to_string(),
            r.in_d.to_string(),
            fmt_f64(r.lambda_min_g),
            fmt_f64(r.lambda_min_h),
            r.xi.map(fmt_f64).unwrap_or_else(|| "NaN".into()),
            r.iters_to_tol.to_string(),
            fmt_f64(r.r_hat),
            r.status.clone(),
        ])
        .map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

/// Matrix as CSV: a header row with the row and column counts, then the rows.
pub fn write_matrix<W: Write>(w: W, m: &Matrix) -> Result<()> {
    let mut out = csv::WriterBuilder::new().flexible(true).from_writer(w);
    out.write_record([m.nrows().to_string(), m.ncols().to_string()]).map_err(csv_error)?;
    for row in m.row_iter() {
        out.write_record(row.iter().map(|&v| fmt_f64(v))).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

/// Flat key-value report; keys are kept sorted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report(pub Map<String, Value>);

impl Report {
    pub fn num(&mut self, key: &str, v: f64) {
        let value = if v.is_finite() {
            serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
        } else {
            Value::String(v.to_string())
        };
        self.0.insert(key.into(), value);
    }

    pub fn int(&mut self, key: &str, v: i64) {
        self.0.insert(key.into(), Value::from(v));
    }

    pub fn flag(&mut self, key: &str, v: bool) {
        self.0.insert(key.into(), Value::Bool(v));
    }

    pub fn text(&mut self, key: &str, v: impl Into<String>) {
        self.0.insert(key.into(), Value::String(v.into()));
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        match self.0.get(key)? {
            Value::Number(n) => n.as_f64(),
            Value::String(s) => s.parse().ok(),
            _ => None,
        }
    }

    pub fn get_bool(&self, key: &str) -> Option<bool> {
        self.0.get(key)?.as_bool()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.0).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        match serde_json::from_str::<Value>(text).map_err(|e| Error::Document(e.to_string()))? {
            Value::Object(m) if m.values().all(|v| !v.is_object() && !v.is_array()) => Ok(Report(m)),
            _ => Err(Error::Document("report must be a flat object".into())),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_csv_layout() {
        let row = TraceRow {
            k: 0,
            feasibility: 0.5,
            correction_residual: 0.25,
            d_norm_sq: 0.1,
            contraction_slack: None,
            identity_error: 0.0,
            dist_h: Some(1.0),
            error_map_sq: None,
            error_bound_rhs: None,
        };
        let mut buf = Vec::new();
        write_trace(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "k,feasibility,correction_residual,d_norm_sq,contraction_slack,identity_error,dist_H,error_map_sq,error_bound_rhs\n0,0.5,0.25,0.1,,0.0,1.0,,\n"
        );
    }

    #[test]
    fn report_round_trip() {
        let mut r = Report::default();
        r.num("a", 0.1);
        r.num("b", f64::INFINITY);
        r.flag("c", true);
        r.int("d", -1);
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.get_f64("b"), Some(f64::INFINITY));
        assert!(Report::from_json("{\"a\": {\"b\": 1}}").is_err());
    }

    #[test]
    fn float_format() {
        assert_eq!(fmt_f64(1.1102230246251565e-16), "1.1102230246251565e-16");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        assert_eq!(fmt_f64(-1.0), "-1.0");
    }

    #[test]
    fn matrix_csv() {
        let mut buf = Vec::new();
        write_matrix(&mut buf, &Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 2.0])).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "2,2\n1.0,0.5\n0.5,2.0\n");
    }
}
