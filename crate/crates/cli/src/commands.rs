//! Dispatch of a resolved [`RunConfig`] to the engines, and result writing.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use wishart_core::analysis::{compare, CompareReport};
use wishart_core::baseline::{empirical_density, trace_form_resolvent};
use wishart_core::bp::bp_ensemble_curve;
use wishart_core::ensembles::{build_covariance_factors, column_count, EnsembleSpec, HyperparameterLaw, Structure};
use wishart_core::numeric::{trapezoid_integrate, CurveEntry, DensityCurve, LambdaGrid, Method};
use wishart_core::replica::{
    density_from_chi, inverse_moments_case1, mp_density_curve, portfolio_quantities, replica_density_curve,
};
use wishart_core::Error;

use crate::config::{Command, OutputFormat, RunConfig};
use crate::error::CliError;
use crate::output::{format_float, write_csv, write_json, CurveDocument, CurveMetadata, TOOL_VERSION};

/// Closed-form inverse moments of a row-variance ensemble, with the same
/// integrals taken numerically over the replica curve on the configured grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentsReport {
    pub ensemble: EnsembleSpec,
    pub m1_closed: f64,
    pub m2_closed: f64,
    pub m1_numeric: f64,
    pub m2_numeric: f64,
    pub epsilon_min: f64,
    pub q_w: f64,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareMetadata {
    pub ensemble: EnsembleSpec,
    pub methods: Vec<Method>,
    pub n_matrix: usize,
    pub seeds: Vec<u64>,
    pub epsilon: f64,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareOutput {
    pub metadata: CompareMetadata,
    pub report: CompareReport,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Curve(CurveDocument),
    Moments(MomentsReport),
    Compare(CompareOutput),
}

/// Runs `command` on a validated config.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let spec = cfg.spec()?;
    let grid = cfg.lambda_grid()?;
    let epsilon = cfg.grid.epsilon;
    match command {
        Command::Compare => {
            let seeds = cfg.sampling.seeds();
            let curves = cfg
                .compare
                .methods
                .iter()
                .map(|&m| Ok(method_curve(m, cfg, &spec, &grid)?.1))
                .collect::<Result<Vec<_>, CliError>>()?;
            let report = compare(&curves, &grid)?;
            Ok(Outcome::Compare(CompareOutput {
                metadata: CompareMetadata {
                    ensemble: spec,
                    methods: cfg.compare.methods.clone(),
                    n_matrix: cfg.sampling.n,
                    seeds,
                    epsilon,
                    tool_version: TOOL_VERSION.to_string(),
                },
                report,
            }))
        }
        Command::Moments => {
            let Structure::RowVariance { law_s } = &spec.structure else {
                return Err(Error::Domain("moments are available for the row-variance case only".into()).into());
            };
            let closed = inverse_moments_case1(law_s, spec.alpha)?;
            let portfolio = portfolio_quantities(law_s, spec.alpha)?;
            let curve = replica_density_curve(&spec, &grid, &cfg.solver)?;
            check_failures(&curve, cfg)?;
            let inverse = |p: i32| trapezoid_integrate(&curve, |l| if l > 0.0 { l.powi(-p) } else { 0.0 });
            Ok(Outcome::Moments(MomentsReport {
                m1_closed: closed.m1,
                m2_closed: closed.m2,
                m1_numeric: inverse(1)?,
                m2_numeric: inverse(2)?,
                epsilon_min: portfolio.epsilon_min,
                q_w: portfolio.q_w,
                ensemble: spec,
                tool_version: TOOL_VERSION.to_string(),
            }))
        }
        _ => {
            let method = match command {
                Command::Replica => Method::Replica,
                Command::Bp => Method::Bp,
                Command::Exact => Method::Exact,
                Command::Mp => Method::Mp,
                Command::Trace => Method::TraceForm,
                Command::Moments | Command::Compare => unreachable!("handled above"),
            };
            let (meta, curve) = method_curve(method, cfg, &spec, &grid)?;
            Ok(Outcome::Curve(CurveDocument::from_curve(&curve, meta)))
        }
    }
}

/// Produces one engine's curve and checks its failure fraction.
fn method_curve(
    method: Method,
    cfg: &RunConfig,
    spec: &EnsembleSpec,
    grid: &LambdaGrid,
) -> Result<(CurveMetadata, DensityCurve), CliError> {
    let n = cfg.sampling.n;
    let seeds = cfg.sampling.seeds();
    let eps = Some(cfg.grid.epsilon);
    let realized = || -> Result<f64, CliError> { Ok(column_count(spec.alpha, n)? as f64 / n as f64) };
    let (meta, curve) = match method {
        Method::Replica => (
            CurveMetadata::new(method, Some(spec.clone()), eps, vec![]),
            replica_density_curve(spec, grid, &cfg.solver)?,
        ),
        Method::Mp => {
            let (HyperparameterLaw::Constant { value: s }, HyperparameterLaw::Constant { value: t }) =
                (spec.law_s(), spec.law_t())
            else {
                return Err(Error::Domain("the closed form needs constant hyperparameter laws".into()).into());
            };
            (
                CurveMetadata::new(method, Some(spec.clone()), eps, vec![]),
                mp_density_curve(spec.alpha, s * t, grid)?,
            )
        }
        Method::Bp => {
            let avg = bp_ensemble_curve(spec, n, &seeds, grid, &cfg.solver)?;
            let mut meta = CurveMetadata::new(method, Some(spec.clone()), eps, seeds);
            meta.realized_alpha = Some(realized()?);
            (meta, avg.curve)
        }
        Method::Exact => {
            let hist = empirical_density(spec, n, &seeds, &cfg.bin_edges()?)?;
            let mut meta = CurveMetadata::new(method, Some(spec.clone()), None, seeds);
            meta.realized_alpha = Some(realized()?);
            (meta, hist.to_curve(Some(spec.clone())))
        }
        Method::TraceForm => {
            let seed = cfg.sampling.base_seed;
            let factors = build_covariance_factors(spec, n, seed)?;
            let (m, theta) = (factors.m.dense(), factors.theta.dense());
            let entries = grid
                .points()
                .par_iter()
                .map(|&pt| match trace_form_resolvent(&m, &theta, pt, &cfg.solver) {
                    Ok(params) => Ok(CurveEntry {
                        lambda: pt.lambda,
                        rho: density_from_chi(&params)?,
                        chi_w: params.chi_w,
                        iterations: params.iterations,
                        converged: true,
                    }),
                    Err(Error::NonConvergence { iterations, best, .. }) => Ok(CurveEntry::failed(
                        pt.lambda,
                        best.get(1).copied().unwrap_or(Complex64::new(f64::NAN, f64::NAN)),
                        iterations,
                    )),
                    Err(e) => Err(e),
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let mut meta = CurveMetadata::new(method, Some(spec.clone()), eps, vec![seed]);
            meta.realized_alpha = Some(realized()?);
            (meta, DensityCurve::new(entries, method, Some(spec.clone())))
        }
    };
    check_failures(&curve, cfg)?;
    Ok((meta, curve))
}

fn check_failures(curve: &DensityCurve, cfg: &RunConfig) -> Result<(), CliError> {
    let total = curve.len();
    let failed = total - curve.converged_count();
    if failed as f64 > cfg.max_failure_fraction * total as f64 {
        return Err(CliError::NonConvergence {
            method: curve.method.to_string(),
            failed,
            total,
            allowed: cfg.max_failure_fraction,
        });
    }
    Ok(())
}

/// Writes `outcome` to `cfg.output.path`, or to `stdout` when no path is set.
pub fn write_outcome(outcome: &Outcome, cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cfg.output.path {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::io(path, e))?;
            let mut w = BufWriter::new(file);
            write_to(outcome, cfg.output.format, &mut w)?;
            w.flush().map_err(|e| CliError::io(Path::new(path), e))
        }
        None => write_to(outcome, cfg.output.format, stdout),
    }
}

fn write_to(outcome: &Outcome, format: OutputFormat, w: &mut dyn Write) -> Result<(), CliError> {
    let io = |e| CliError::io("<output>", e);
    match (outcome, format) {
        (Outcome::Curve(doc), OutputFormat::Csv) => write_csv(w, doc.metadata.as_ref(), &doc.entries),
        (Outcome::Curve(doc), OutputFormat::Json) => write_json(w, doc.metadata.as_ref(), &doc.entries),
        (Outcome::Moments(m), OutputFormat::Csv) => {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(["quantity", "value"])?;
            for (k, v) in [
                ("m1_closed", m.m1_closed),
                ("m2_closed", m.m2_closed),
                ("m1_numeric", m.m1_numeric),
                ("m2_numeric", m.m2_numeric),
                ("epsilon_min", m.epsilon_min),
                ("q_w", m.q_w),
            ] {
                out.write_record([k.to_string(), format_float(v)])?;
            }
            out.flush().map_err(io)
        }
        (Outcome::Compare(c), OutputFormat::Csv) => {
            let mut out = csv::Writer::from_writer(w);
            out.write_record([
                "method_a", "method_b", "bulk_min", "bulk_max", "sup_norm", "l1", "disjoint",
            ])?;
            let methods = &c.metadata.methods;
            for p in &c.report.pairs {
                let (lo, hi) = p.bulk.unwrap_or((f64::NAN, f64::NAN));
                out.write_record([
                    methods[p.a].to_string(),
                    methods[p.b].to_string(),
                    format_float(lo),
                    format_float(hi),
                    format_float(p.sup_norm),
                    format_float(p.l1),
                    p.disjoint.to_string(),
                ])?;
            }
            out.flush().map_err(io)
        }
        (Outcome::Moments(m), OutputFormat::Json) => json_line(w, m),
        (Outcome::Compare(c), OutputFormat::Json) => json_line(w, c),
    }
}

fn json_line<T: Serialize>(w: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w).map_err(|e| CliError::io("<output>", e))
}

/// Short human-readable summary for stderr.
pub fn summarize(outcome: &Outcome) -> String {
    match outcome {
        Outcome::Curve(doc) => {
            let total = doc.entries.len();
            let ok = doc.entries.iter().filter(|e| e.converged).count();
            let method = doc.metadata.as_ref().map_or("curve".into(), |m| m.method.to_string());
            format!("{method}: {ok} of {total} points converged")
        }
        Outcome::Moments(m) => format!(
            "<λ⁻¹> closed {:.6} numeric {:.6}; <λ⁻²> closed {:.6} numeric {:.6}",
            m.m1_closed, m.m1_numeric, m.m2_closed, m.m2_numeric
        ),
        Outcome::Compare(c) => {
            let mut s = String::new();
            for (m, cs) in c.metadata.methods.iter().zip(&c.report.curves) {
                let edges = cs
                    .edges
                    .map_or("no support".into(), |e| format!("edges ({:.4}, {:.4})", e.lambda_min_hat, e.lambda_max_hat));
                s.push_str(&format!("{m}: {edges}, mass {:.4}\n", cs.mass));
            }
            for p in &c.report.pairs {
                let (a, b) = (c.metadata.methods[p.a], c.metadata.methods[p.b]);
                if p.disjoint {
                    s.push_str(&format!("{a} vs {b}: disjoint supports\n"));
                } else {
                    s.push_str(&format!("{a} vs {b}: sup-norm {:.3e}, L1 {:.3e}\n", p.sup_norm, p.l1));
                }
            }
            s.trim_end().to_string()
        }
    }
}
