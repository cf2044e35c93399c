//! JSON and CSV emission.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which parses
//! back to the same bits. Non-finite values become `null` in JSON.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::run::Payload;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub subcommand: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub n_upper: usize,
    pub n_lower: usize,
    pub threads: usize,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultBundle {
    pub metadata: Metadata,
    pub payload: Payload,
}

struct SigDigits;

impl Formatter for SigDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        write!(w, "{:.16e}", f64::from(v))
    }
}

/// Serializes any value with the 17-digit float format.
pub fn to_json_value<S: Serialize>(value: &S) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits);
    value.serialize(&mut ser).map_err(|e| CliError::Serialize(e.to_string()))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| CliError::Serialize(e.to_string()))
}

pub fn to_json(bundle: &ResultBundle) -> Result<String, CliError> {
    to_json_value(bundle)
}

pub(crate) fn float(v: f64) -> String {
    format!("{v:.16e}")
}

/// The payload as CSV. Metadata is not part of the CSV output.
pub fn to_csv(payload: &Payload) -> Result<String, CliError> {
    let (header, rows) = payload.table();
    let mut w = csv::Writer::from_writer(Vec::new());
    let ser = |e: csv::Error| CliError::Serialize(e.to_string());
    w.write_record(&header).map_err(ser)?;
    for r in rows {
        w.write_record(&r).map_err(ser)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Serialize(e.to_string()))
}

/// Writes the bundle to `path`, or to stdout when `path` is `None`.
pub fn emit(bundle: &ResultBundle, format: Format, path: Option<&Path>) -> Result<(), CliError> {
    let text = match format {
        Format::Json => to_json(bundle)?,
        Format::Csv => to_csv(&bundle.payload)?,
    };
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => io::stdout().write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: "stdout".into(),
            source,
        }),
    }
}
