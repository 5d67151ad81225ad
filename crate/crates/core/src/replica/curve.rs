use num_complex::Complex64;
use rayon::prelude::*;

use super::solvers::PreparedCase;
use super::{density_from_chi, OrderParams};
use crate::ensembles::EnsembleSpec;
use crate::error::{Error, Result};
use crate::numeric::{richardson_extrapolate, CurveEntry, DensityCurve, LambdaGrid, Method, SolverConfig};

/// Sweeps the replica solver over `grid`.
///
/// With `warm_start` the grid is visited in its sweep order (descending by
/// default) and each point starts from the last converged solution; the first
/// point starts on the large-`λ` asymptote. Failed points are flagged in the
/// curve and never abort the sweep.
pub fn replica_density_curve(spec: &EnsembleSpec, grid: &LambdaGrid, cfg: &SolverConfig) -> Result<DensityCurve> {
    cfg.validate()?;
    let case = PreparedCase::new(spec)?;
    let points = grid.points();

    let entries: Vec<CurveEntry> = if cfg.warm_start {
        let mut slots = vec![None; points.len()];
        let mut carry: Option<Complex64> = None;
        for i in grid.sweep_order() {
            let outcome = case.solve(spec.alpha, points[i], cfg, carry);
            if let Ok(p) = &outcome {
                if p.converged {
                    carry = Some(case.carried(p));
                }
            }
            slots[i] = Some(to_entry(points[i].lambda, outcome));
        }
        slots.into_iter().map(|e| e.expect("every grid index visited")).collect()
    } else {
        points
            .par_iter()
            .map(|pt| to_entry(pt.lambda, case.solve(spec.alpha, *pt, cfg, None)))
            .collect()
    };

    Ok(DensityCurve::new(entries, Method::Replica, Some(spec.clone())))
}

fn to_entry(lambda: f64, outcome: Result<OrderParams>) -> CurveEntry {
    match outcome {
        Ok(p) if p.converged => match density_from_chi(&p) {
            Ok(rho) => CurveEntry {
                lambda,
                rho,
                chi_w: p.chi_w,
                iterations: p.iterations,
                converged: true,
            },
            Err(_) => CurveEntry::failed(lambda, p.chi_w, p.iterations),
        },
        Ok(p) => CurveEntry::failed(lambda, p.chi_w, p.iterations),
        Err(Error::NonFiniteIterate { iteration }) => {
            CurveEntry::failed(lambda, Complex64::new(f64::NAN, f64::NAN), iteration)
        }
        Err(_) => CurveEntry::failed(lambda, Complex64::new(f64::NAN, f64::NAN), 0),
    }
}

/// Richardson-extrapolated curve from sweeps at `ε` and `ε/2` (per grid point).
///
/// A point is converged only if both sweeps converged there. Extrapolated
/// densities below zero are clamped to zero.
pub fn replica_density_curve_extrapolated(
    spec: &EnsembleSpec,
    grid: &LambdaGrid,
    cfg: &SolverConfig,
) -> Result<DensityCurve> {
    let coarse = replica_density_curve(spec, grid, cfg)?;
    let halved = LambdaGrid::new(
        grid.points()
            .iter()
            .map(|p| p.with_epsilon(0.5 * p.epsilon))
            .collect::<Result<Vec<_>>>()?,
        grid.descending_sweep,
    )?;
    let fine = replica_density_curve(spec, &halved, cfg)?;
    let entries = coarse
        .entries
        .iter()
        .zip(&fine.entries)
        .map(|(a, b)| {
            if a.converged && b.converged {
                CurveEntry {
                    lambda: a.lambda,
                    rho: richardson_extrapolate(a.rho, b.rho).max(0.0),
                    chi_w: b.chi_w * 2.0 - a.chi_w,
                    iterations: a.iterations + b.iterations,
                    converged: true,
                }
            } else {
                CurveEntry::failed(a.lambda, b.chi_w, a.iterations + b.iterations)
            }
        })
        .collect();
    Ok(DensityCurve::new(entries, Method::Replica, Some(spec.clone())))
}
