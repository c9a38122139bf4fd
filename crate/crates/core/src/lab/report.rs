//! Result rows and their CSV / JSON serialization.
//!
//! Floats are written in shortest round-trip form, so reading a report back
//! reproduces every value bit for bit. Absent estimates are empty CSV fields
//! and `null` in JSON.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::workbounds::Certification;

pub const CSV_HEADER: [&str; 12] = [
    "ensemble",
    "N",
    "sample",
    "seed",
    "w_global",
    "w_local",
    "eg_value",
    "eg_cert",
    "w_locc_upper",
    "w_locc_lower",
    "best_protocol",
    "wall_ms",
];

/// One `(N, sample)` evaluation. Work values are in nats.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub ensemble: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub sample: usize,
    pub seed: u64,
    pub w_global: f64,
    pub w_local: Option<f64>,
    pub eg_value: Option<f64>,
    pub eg_cert: Option<Certification>,
    pub w_locc_upper: Option<f64>,
    pub w_locc_lower: f64,
    pub best_protocol: String,
    pub wall_ms: f64,
}

impl ResultRow {
    /// Numeric column by header name.
    pub fn column(&self, name: &str) -> Option<f64> {
        match name {
            "w_global" => Some(self.w_global),
            "w_local" => self.w_local,
            "eg_value" => self.eg_value,
            "w_locc_upper" => self.w_locc_upper,
            "w_locc_lower" => Some(self.w_locc_lower),
            "wall_ms" => Some(self.wall_ms),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

pub fn write_report<W: Write>(out: W, rows: &[ResultRow], format: ReportFormat) -> Result<()> {
    match format {
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            w.write_record(CSV_HEADER)?;
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        ReportFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
            out.flush()?;
        }
    }
    Ok(())
}

pub fn emit_report(rows: &[ResultRow], path: &Path, format: ReportFormat) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("no rows to report".into()));
    }
    write_report(BufWriter::new(File::create(path)?), rows, format)
}

pub fn parse_report<R: Read>(input: R, format: ReportFormat) -> Result<Vec<ResultRow>> {
    match format {
        ReportFormat::Csv => {
            let mut r = csv::Reader::from_reader(input);
            let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
            if header != CSV_HEADER {
                return Err(Error::Parse { line: 1, msg: format!("unexpected header {}", header.join(",")) });
            }
            Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
        }
        ReportFormat::Json => Ok(serde_json::from_reader(input)?),
    }
}

pub fn read_report(path: &Path, format: ReportFormat) -> Result<Vec<ResultRow>> {
    parse_report(BufReader::new(File::open(path)?), format)
}
