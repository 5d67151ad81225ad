use serde::{Deserialize, Serialize};

use super::edges::{estimate_support_edges, SupportEdges, DEFAULT_EDGE_THRESHOLD};
use crate::ensembles::Structure;
use crate::error::{Error, Result};
use crate::numeric::{trapezoid_integrate, DensityCurve, LambdaGrid, Method};
use crate::replica::inverse_moments_case1;

/// Per-curve summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub method: Method,
    /// `None` when no point exceeds the edge threshold.
    pub edges: Option<SupportEdges>,
    pub mass: f64,
    pub first_moment: f64,
}

/// Distances between two curves resampled on the common grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDistance {
    pub a: usize,
    pub b: usize,
    /// Interval over which the norms are taken; `None` when the supports are disjoint.
    pub bulk: Option<(f64, f64)>,
    pub sup_norm: f64,
    pub l1: f64,
    pub disjoint: bool,
}

/// Numerical inverse moments of a row-variance curve against the closed forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub curve: usize,
    pub m1_numeric: f64,
    pub m1_closed: f64,
    pub m2_numeric: f64,
    pub m2_closed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub curves: Vec<CurveSummary>,
    pub pairs: Vec<PairDistance>,
    pub moments: Vec<MomentCheck>,
}

impl CompareReport {
    pub fn pair(&self, a: usize, b: usize) -> Option<&PairDistance> {
        self.pairs
            .iter()
            .find(|p| (p.a, p.b) == (a, b) || (p.a, p.b) == (b, a))
    }

    pub fn max_sup_norm(&self) -> f64 {
        self.pairs.iter().map(|p| p.sup_norm).fold(0.0, f64::max)
    }
}

/// Compares curves on `grid`.
///
/// Each curve is resampled by linear interpolation. Norms for a pair are
/// restricted to the bulk: the overlap of both detected supports, shrunk at
/// each end by two spacings of the coarsest of the two curves and the grid.
/// Grid points where either curve cannot be resampled are skipped.
pub fn compare(curves: &[DensityCurve], grid: &LambdaGrid) -> Result<CompareReport> {
    if curves.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "comparison needs at least two curves, got {}",
            curves.len()
        )));
    }
    let lambdas = grid.lambdas();
    let grid_spacing = median_gap(&lambdas).unwrap_or(0.0);

    let mut summaries = Vec::with_capacity(curves.len());
    let mut moments = Vec::new();
    for (i, c) in curves.iter().enumerate() {
        let edges = match estimate_support_edges(c, DEFAULT_EDGE_THRESHOLD) {
            Ok(e) => Some(e),
            Err(Error::NoSupportDetected { .. }) => None,
            Err(e) => return Err(e),
        };
        summaries.push(CurveSummary {
            method: c.method,
            edges,
            mass: trapezoid_integrate(c, |_| 1.0)?,
            first_moment: trapezoid_integrate(c, |l| l)?,
        });
        if let Some(check) = moment_check(i, c)? {
            moments.push(check);
        }
    }

    let resampled: Vec<Vec<Option<f64>>> = curves
        .iter()
        .map(|c| lambdas.iter().map(|&l| c.interpolate(l)).collect())
        .collect();

    let mut pairs = Vec::new();
    for a in 0..curves.len() {
        for b in (a + 1)..curves.len() {
            let spacing = [curves[a].median_spacing(), curves[b].median_spacing()]
                .into_iter()
                .flatten()
                .fold(grid_spacing, f64::max);
            let bulk = match (summaries[a].edges, summaries[b].edges) {
                (Some(ea), Some(eb)) => {
                    let lo = ea.lambda_min_hat.max(eb.lambda_min_hat) + 2.0 * spacing;
                    let hi = ea.lambda_max_hat.min(eb.lambda_max_hat) - 2.0 * spacing;
                    (lo < hi).then_some((lo, hi))
                }
                _ => None,
            };
            let (sup_norm, l1) = match bulk {
                Some((lo, hi)) => distances(&lambdas, &resampled[a], &resampled[b], lo, hi),
                None => (0.0, 0.0),
            };
            pairs.push(PairDistance {
                a,
                b,
                bulk,
                sup_norm,
                l1,
                disjoint: bulk.is_none(),
            });
        }
    }
    Ok(CompareReport {
        curves: summaries,
        pairs,
        moments,
    })
}

fn median_gap(x: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let mut g: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    g.sort_by(f64::total_cmp);
    Some(g[g.len() / 2])
}

/// Sup norm and trapezoid L1 norm of `a - b` over grid points inside `[lo, hi]`.
fn distances(lambdas: &[f64], a: &[Option<f64>], b: &[Option<f64>], lo: f64, hi: f64) -> (f64, f64) {
    let diffs: Vec<(f64, f64)> = lambdas
        .iter()
        .zip(a.iter().zip(b))
        .filter(|(l, _)| **l >= lo && **l <= hi)
        .filter_map(|(&l, (x, y))| Some((l, (x.as_ref()? - y.as_ref()?).abs())))
        .collect();
    let sup = diffs.iter().map(|d| d.1).fold(0.0, f64::max);
    let l1 = diffs
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum();
    (sup, l1)
}

/// Inverse moments of a row-variance curve with `α > 1` and a law bounded away from zero.
fn moment_check(index: usize, curve: &DensityCurve) -> Result<Option<MomentCheck>> {
    let Some(spec) = &curve.ensemble else {
        return Ok(None);
    };
    let Structure::RowVariance { law_s } = &spec.structure else {
        return Ok(None);
    };
    if !(spec.alpha > 1.0) || !(law_s.support_min() > 0.0) {
        return Ok(None);
    }
    let closed = inverse_moments_case1(law_s, spec.alpha)?;
    let inverse = |p: i32| {
        trapezoid_integrate(curve, |l| if l > 0.0 { l.powi(-p) } else { 0.0 })
    };
    Ok(Some(MomentCheck {
        curve: index,
        m1_numeric: inverse(1)?,
        m1_closed: closed.m1,
        m2_numeric: inverse(2)?,
        m2_closed: closed.m2,
    }))
}
