use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::DensityCurve;

/// Default density level that marks the support.
pub const DEFAULT_EDGE_THRESHOLD: f64 = 1e-3;

/// Minimum number of converged points needed to locate edges.
pub const MIN_EDGE_POINTS: usize = 10;

const VANISHED_FRACTION: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportEdges {
    /// Edge estimates after the square-root refinement.
    pub lambda_min_hat: f64,
    pub lambda_max_hat: f64,
    /// Plain linearly interpolated crossings of `ρ = threshold`.
    pub crossing_min: f64,
    pub crossing_max: f64,
}

/// Outermost support edges of a density curve.
///
/// The raw estimate is the outermost crossing of `ρ = threshold`, linearly
/// interpolated between grid points. Because a soft edge vanishes like a square
/// root, that crossing sits inside the true edge by roughly
/// `threshold² / slope(ρ²)`. The refined estimate extrapolates `ρ²` linearly
/// through the two outermost points above threshold down to zero. It falls
/// back to the raw crossing when the extrapolated edge is not between the
/// outermost point above threshold and the nearest point outside it where the
/// density has vanished (dropped below `threshold / 100`).
pub fn estimate_support_edges(curve: &DensityCurve, threshold: f64) -> Result<SupportEdges> {
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(Error::InvalidInput(format!("threshold must be > 0, got {threshold}")));
    }
    let pts: Vec<(f64, f64)> = curve.converged().map(|e| (e.lambda, e.rho)).collect();
    if pts.len() < MIN_EDGE_POINTS {
        return Err(Error::InsufficientGrid {
            needed: MIN_EDGE_POINTS,
            found: pts.len(),
        });
    }
    let above = |p: &(f64, f64)| p.1 > threshold;
    let first = pts.iter().position(above).ok_or(Error::NoSupportDetected { threshold })?;
    let last = pts.iter().rposition(above).expect("some point is above threshold");

    let crossing_min = if first == 0 {
        pts[0].0
    } else {
        crossing(pts[first - 1], pts[first], threshold)
    };
    let crossing_max = if last + 1 == pts.len() {
        pts[last].0
    } else {
        crossing(pts[last], pts[last + 1], threshold)
    };

    let vanished = |p: &&(f64, f64)| p.1 <= VANISHED_FRACTION * threshold;
    let lambda_min_hat = if first > 0 && first < last && above(&pts[first + 1]) {
        let floor = pts[..first].iter().rev().find(vanished).unwrap_or(&pts[0]).0;
        sqrt_law_edge(pts[first], pts[first + 1])
            .filter(|&x| x >= floor && x <= pts[first].0)
            .unwrap_or(crossing_min)
    } else {
        crossing_min
    };
    let lambda_max_hat = if last + 1 < pts.len() && last > first && above(&pts[last - 1]) {
        let ceiling = pts[last + 1..].iter().find(vanished).unwrap_or(&pts[pts.len() - 1]).0;
        sqrt_law_edge(pts[last], pts[last - 1])
            .filter(|&x| x >= pts[last].0 && x <= ceiling)
            .unwrap_or(crossing_max)
    } else {
        crossing_max
    };
    Ok(SupportEdges {
        lambda_min_hat,
        lambda_max_hat,
        crossing_min,
        crossing_max,
    })
}

fn crossing(a: (f64, f64), b: (f64, f64), level: f64) -> f64 {
    if a.1 == b.1 {
        return 0.5 * (a.0 + b.0);
    }
    a.0 + (level - a.1) * (b.0 - a.0) / (b.1 - a.1)
}

/// Zero of the line through `(λ, ρ²)` at the outer point `o` and inner point `i`,
/// provided `ρ²` grows inward.
fn sqrt_law_edge(o: (f64, f64), i: (f64, f64)) -> Option<f64> {
    let (yo, yi) = (o.1 * o.1, i.1 * i.1);
    if !(yi > yo) {
        return None;
    }
    Some(o.0 - yo * (i.0 - o.0) / (yi - yo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{LambdaGrid, Method};
    use crate::replica::mp_density_curve;

    #[test]
    fn mp_edges_from_dense_grid() {
        let grid = LambdaGrid::linspace(0.0, 35.0, 1000, 1e-9).unwrap();
        let curve = mp_density_curve(4.0, 3.0, &grid).unwrap();
        let e = estimate_support_edges(&curve, DEFAULT_EDGE_THRESHOLD).unwrap();
        assert!((e.lambda_min_hat - 3.0).abs() < 0.02 && (e.lambda_max_hat - 27.0).abs() < 0.02, "{e:?}");
        let h = 35.0 / 999.0;
        assert!((e.crossing_min - e.lambda_min_hat).abs() < h && (e.crossing_max - e.lambda_max_hat).abs() < h);
    }

    #[test]
    fn refinement_is_exact_for_a_pure_square_root() {
        let l: Vec<f64> = (0..40).map(|i| i as f64 * 0.25).collect();
        let rho: Vec<f64> = l
            .iter()
            .map(|&x| (x - 2.1).max(0.0).sqrt().min((7.3 - x).max(0.0).sqrt()))
            .collect();
        let e = estimate_support_edges(&DensityCurve::from_samples(&l, &rho, Method::Exact), 1e-3).unwrap();
        assert!((e.lambda_min_hat - 2.1).abs() < 1e-12, "{e:?}");
        assert!((e.lambda_max_hat - 7.3).abs() < 1e-12, "{e:?}");
    }

    #[test]
    fn all_zero_curve_has_no_support() {
        let l: Vec<f64> = (0..20).map(f64::from).collect();
        let c = DensityCurve::from_samples(&l, &[0.0; 20], Method::Exact);
        assert!(matches!(
            estimate_support_edges(&c, 1e-3),
            Err(Error::NoSupportDetected { .. })
        ));
    }

    #[test]
    fn preconditions() {
        let l: Vec<f64> = (0..5).map(f64::from).collect();
        let c = DensityCurve::from_samples(&l, &[1.0; 5], Method::Exact);
        assert!(matches!(
            estimate_support_edges(&c, 1e-3),
            Err(Error::InsufficientGrid { needed: 10, found: 5 })
        ));
        assert!(estimate_support_edges(&c, 0.0).is_err());
    }

    #[test]
    fn support_touching_grid_ends() {
        let l: Vec<f64> = (0..12).map(f64::from).collect();
        let c = DensityCurve::from_samples(&l, &[1.0; 12], Method::Exact);
        let e = estimate_support_edges(&c, 1e-3).unwrap();
        assert_eq!((e.lambda_min_hat, e.lambda_max_hat), (0.0, 11.0));
    }
}
