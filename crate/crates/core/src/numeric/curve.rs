use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensembles::EnsembleSpec;
use crate::error::{Error, Result};

/// Which engine produced a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Replica,
    Bp,
    Exact,
    Mp,
    TraceForm,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Replica => "replica",
            Method::Bp => "bp",
            Method::Exact => "exact",
            Method::Mp => "mp",
            Method::TraceForm => "trace_form",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "replica" => Method::Replica,
            "bp" => Method::Bp,
            "exact" => Method::Exact,
            "mp" => Method::Mp,
            "trace_form" => Method::TraceForm,
            other => return Err(Error::InvalidInput(format!("unknown method tag `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveEntry {
    pub lambda: f64,
    /// `NaN` when `converged` is false.
    pub rho: f64,
    pub chi_w: Complex64,
    pub iterations: usize,
    pub converged: bool,
}

impl CurveEntry {
    pub fn failed(lambda: f64, chi_w: Complex64, iterations: usize) -> Self {
        Self {
            lambda,
            rho: f64::NAN,
            chi_w,
            iterations,
            converged: false,
        }
    }
}

/// Samples of a spectral density, ascending in `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    pub entries: Vec<CurveEntry>,
    pub method: Method,
    pub ensemble: Option<EnsembleSpec>,
}

impl DensityCurve {
    pub fn new(entries: Vec<CurveEntry>, method: Method, ensemble: Option<EnsembleSpec>) -> Self {
        Self {
            entries,
            method,
            ensemble,
        }
    }

    /// Builds a converged curve from plain `(lambda, rho)` samples.
    pub fn from_samples(lambdas: &[f64], rho: &[f64], method: Method) -> Self {
        let entries = lambdas
            .iter()
            .zip(rho)
            .map(|(&lambda, &rho)| CurveEntry {
                lambda,
                rho,
                chi_w: Complex64::new(f64::NAN, f64::NAN),
                iterations: 0,
                converged: true,
            })
            .collect();
        Self::new(entries, method, None)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn converged(&self) -> impl Iterator<Item = &CurveEntry> {
        self.entries.iter().filter(|e| e.converged)
    }

    pub fn converged_count(&self) -> usize {
        self.converged().count()
    }

    pub fn failure_fraction(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        1.0 - self.converged_count() as f64 / self.entries.len() as f64
    }

    /// Linear interpolation of the converged samples; `None` outside their span.
    pub fn interpolate(&self, lambda: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self.converged().map(|e| (e.lambda, e.rho)).collect();
        interpolate_sorted(&pts, lambda)
    }

    /// Median spacing between consecutive converged abscissae.
    pub fn median_spacing(&self) -> Option<f64> {
        let l: Vec<f64> = self.converged().map(|e| e.lambda).collect();
        if l.len() < 2 {
            return None;
        }
        let mut gaps: Vec<f64> = l.windows(2).map(|w| w[1] - w[0]).collect();
        gaps.sort_by(f64::total_cmp);
        Some(gaps[gaps.len() / 2])
    }
}

pub(crate) fn interpolate_sorted(pts: &[(f64, f64)], x: f64) -> Option<f64> {
    let (first, last) = (pts.first()?, pts.last()?);
    if x < first.0 || x > last.0 {
        return None;
    }
    let i = pts.partition_point(|p| p.0 < x);
    if i < pts.len() && pts[i].0 == x {
        return Some(pts[i].1);
    }
    let (a, b) = (pts[i - 1], pts[i]);
    let t = (x - a.0) / (b.0 - a.0);
    Some(a.1 + t * (b.1 - a.1))
}
