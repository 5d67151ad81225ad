//! Curve serialization.
//!
//! CSV writes every float with 17 significant digits, which round-trips any
//! `f64` bit-exactly. An optional first line `# {json}` carries the metadata.
//! JSON uses the shortest round-tripping decimal form and writes `NaN` as `null`.

use std::io::{BufRead, BufReader, Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use wishart_core::ensembles::EnsembleSpec;
use wishart_core::numeric::{CurveEntry, DensityCurve, Method};

use crate::error::CliError;

pub const CSV_HEADER: [&str; 6] = ["lambda", "rho", "re_chi_w", "im_chi_w", "iterations", "converged"];

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMetadata {
    pub method: Method,
    pub ensemble: Option<EnsembleSpec>,
    /// `p / N` of the sampled matrices; `None` for deterministic engines.
    pub realized_alpha: Option<f64>,
    /// Broadening; `None` for histograms.
    pub epsilon: Option<f64>,
    pub seeds: Vec<u64>,
    pub tool_version: String,
}

impl CurveMetadata {
    pub fn new(method: Method, ensemble: Option<EnsembleSpec>, epsilon: Option<f64>, seeds: Vec<u64>) -> Self {
        Self {
            method,
            ensemble,
            realized_alpha: None,
            epsilon,
            seeds,
            tool_version: TOOL_VERSION.to_string(),
        }
    }
}

/// A curve together with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveDocument {
    pub metadata: Option<CurveMetadata>,
    pub entries: Vec<CurveEntry>,
}

/// Formats a float with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(out: W, metadata: Option<&CurveMetadata>, entries: &[CurveEntry]) -> Result<(), CliError> {
    let mut out = out;
    if let Some(m) = metadata {
        writeln!(out, "# {}", serde_json::to_string(m)?).map_err(|e| CliError::io("<output>", e))?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for e in entries {
        w.write_record([
            format_float(e.lambda),
            format_float(e.rho),
            format_float(e.chi_w.re),
            format_float(e.chi_w.im),
            e.iterations.to_string(),
            e.converged.to_string(),
        ])?;
    }
    w.flush().map_err(|e| CliError::io("<output>", e))?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<CurveDocument, CliError> {
    let mut reader = BufReader::new(input);
    let mut first = String::new();
    reader.read_line(&mut first).map_err(|e| CliError::io("<input>", e))?;
    let (metadata, header_line) = match first.strip_prefix("# ") {
        Some(json) => (Some(serde_json::from_str(json.trim_end())?), None),
        None => (None, Some(first)),
    };
    let rest: Box<dyn Read> = match header_line {
        Some(h) => Box::new(std::io::Cursor::new(h.into_bytes()).chain(reader)),
        None => Box::new(reader),
    };
    let mut r = csv::Reader::from_reader(rest);
    if r.headers()?.iter().ne(CSV_HEADER) {
        return Err(CliError::Format(format!("expected header {}", CSV_HEADER.join(","))));
    }
    let mut entries = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let float = |i: usize| -> Result<f64, CliError> {
            rec[i]
                .parse()
                .map_err(|_| CliError::Format(format!("bad number `{}` in column {}", &rec[i], CSV_HEADER[i])))
        };
        entries.push(CurveEntry {
            lambda: float(0)?,
            rho: float(1)?,
            chi_w: Complex64::new(float(2)?, float(3)?),
            iterations: rec[4]
                .parse()
                .map_err(|_| CliError::Format(format!("bad iteration count `{}`", &rec[4])))?,
            converged: rec[5]
                .parse()
                .map_err(|_| CliError::Format(format!("bad flag `{}`", &rec[5])))?,
        });
    }
    Ok(CurveDocument { metadata, entries })
}

#[derive(Serialize, Deserialize)]
struct JsonEntry {
    lambda: Option<f64>,
    rho: Option<f64>,
    re_chi_w: Option<f64>,
    im_chi_w: Option<f64>,
    iterations: usize,
    converged: bool,
}

#[derive(Serialize, Deserialize)]
struct JsonCurve {
    metadata: Option<CurveMetadata>,
    entries: Vec<JsonEntry>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn write_json<W: Write>(mut out: W, metadata: Option<&CurveMetadata>, entries: &[CurveEntry]) -> Result<(), CliError> {
    let doc = JsonCurve {
        metadata: metadata.cloned(),
        entries: entries
            .iter()
            .map(|e| JsonEntry {
                lambda: finite(e.lambda),
                rho: finite(e.rho),
                re_chi_w: finite(e.chi_w.re),
                im_chi_w: finite(e.chi_w.im),
                iterations: e.iterations,
                converged: e.converged,
            })
            .collect(),
    };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out).map_err(|e| CliError::io("<output>", e))?;
    Ok(())
}

pub fn read_json<R: Read>(input: R) -> Result<CurveDocument, CliError> {
    let doc: JsonCurve = serde_json::from_reader(input)?;
    let nan = |x: Option<f64>| x.unwrap_or(f64::NAN);
    Ok(CurveDocument {
        metadata: doc.metadata,
        entries: doc
            .entries
            .into_iter()
            .map(|e| CurveEntry {
                lambda: nan(e.lambda),
                rho: nan(e.rho),
                chi_w: Complex64::new(nan(e.re_chi_w), nan(e.im_chi_w)),
                iterations: e.iterations,
                converged: e.converged,
            })
            .collect(),
    })
}

impl CurveDocument {
    pub fn from_curve(curve: &DensityCurve, metadata: CurveMetadata) -> Self {
        Self {
            metadata: Some(metadata),
            entries: curve.entries.clone(),
        }
    }

    pub fn into_curve(self) -> DensityCurve {
        let (method, ensemble) = match self.metadata {
            Some(m) => (m.method, m.ensemble),
            None => (Method::Exact, None),
        };
        DensityCurve::new(self.entries, method, ensemble)
    }
}
