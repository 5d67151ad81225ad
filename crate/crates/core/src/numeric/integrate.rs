use crate::error::{Error, Result};
use crate::numeric::DensityCurve;

/// Trapezoid rule for `∫ rho(λ) weight(λ) dλ` over the converged entries.
///
/// Non-converged entries are dropped, so a gap is bridged by one trapezoid.
pub fn trapezoid_integrate<W>(curve: &DensityCurve, weight: W) -> Result<f64>
where
    W: Fn(f64) -> f64,
{
    let pts: Vec<(f64, f64)> = curve
        .converged()
        .map(|e| (e.lambda, e.rho * weight(e.lambda)))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientGrid {
            needed: 2,
            found: pts.len(),
        });
    }
    if let Some(&(l, v)) = pts.iter().find(|p| !p.1.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "integrand is not finite at lambda = {l} ({v})"
        )));
    }
    Ok(pts
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum())
}

/// Two-point Richardson extrapolation for a quantity with `O(ε)` error,
/// given values at `ε` and `ε/2`.
#[inline]
pub fn richardson_extrapolate(at_eps: f64, at_half_eps: f64) -> f64 {
    2.0 * at_half_eps - at_eps
}
