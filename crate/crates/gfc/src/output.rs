//! CSV tables and JSON sidecars.
//!
//! Floats are written with 17 significant digits so tables round-trip
//! exactly. A table written to `path` gets a sidecar `path.json` holding the
//! resolved configuration and seed; the CSV body itself carries only data,
//! so re-running a command reproduces it byte for byte.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use gfc_core::gfcalc::ResidualReport;
use gfc_core::PmfTable;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Column-oriented numeric table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, w: W) -> Result<(), CliError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes `table` to `out` (stdout when absent) and, for files, the
/// metadata sidecar.
pub fn emit_table(table: &Table, out: Option<&Path>, meta: &Value) -> Result<(), CliError> {
    match out {
        None => table.write(io::stdout().lock()),
        Some(path) => {
            table.write(File::create(path)?)?;
            write_json(&sidecar_path(path), meta)
        }
    }
}

/// Writes a JSON document to `out` (stdout when absent).
pub fn emit_json(value: &Value, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        None => {
            let mut w = io::stdout().lock();
            serde_json::to_writer_pretty(&mut w, value)?;
            writeln!(w)?;
            Ok(())
        }
        Some(path) => write_json(path, value),
    }
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReportJson {
    pub grid: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_abs: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl From<&ResidualReport> for ResidualReportJson {
    fn from(r: &ResidualReport) -> Self {
        Self {
            grid: r.grid.clone(),
            residuals: r.residuals.clone(),
            max_abs: r.max_abs,
            tolerance: r.tolerance,
            pass: r.pass,
        }
    }
}

pub fn pmf_table(table: &PmfTable, all_rows: bool) -> Table {
    let probs = if all_rows { &table.probs[..] } else { table.requested_probs() };
    let mut t = match table.stderr {
        Some(_) => Table::new(&["n", "p", "stderr"]),
        None => Table::new(&["n", "p"]),
    };
    for (n, p) in probs.iter().enumerate() {
        let mut row = vec![n.to_string(), fmt_float(*p)];
        if let Some(se) = &table.stderr {
            row.push(fmt_float(se[n]));
        }
        t.push(row);
    }
    t
}

/// Metadata describing a pmf table, for its sidecar.
pub fn pmf_metadata(table: &PmfTable) -> Value {
    json!({
        "t": table.t,
        "method": format!("{:?}", table.method),
        "requested": table.requested,
        "nmax": table.probs.len() - 1,
        "mass_deficit": table.mass_deficit,
        "capped": table.capped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [std::f64::consts::PI, 1e-300, -2.5e17, 0.1 + 0.2] {
            let s = fmt_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn table_csv() {
        let mut t = Table::new(&["n", "p"]);
        t.push(vec!["0".into(), fmt_float(0.5)]);
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,p\n0,5.0000000000000000e-1\n");
        assert_eq!(sidecar_path(Path::new("a/b.csv")), PathBuf::from("a/b.csv.json"));
    }
}
