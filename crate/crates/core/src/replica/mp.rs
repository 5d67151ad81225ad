//! Marčenko–Pastur law for i.i.d. entries of variance `v`.

use num_complex::Complex64;

use crate::ensembles::EnsembleSpec;
use crate::error::{Error, Result};
use crate::numeric::{CurveEntry, DensityCurve, LambdaGrid, Method};

fn check(alpha: f64, v: f64) -> Result<()> {
    if alpha > 0.0 && v > 0.0 && alpha.is_finite() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("need alpha > 0 and v > 0, got alpha = {alpha}, v = {v}")))
    }
}

/// Support edges `λ± = (1 ± √α)² v`.
pub fn mp_edges(alpha: f64, v: f64) -> Result<(f64, f64)> {
    check(alpha, v)?;
    let r = alpha.sqrt();
    Ok(((1.0 - r).powi(2) * v, (1.0 + r).powi(2) * v))
}

/// Mass of the atom at `λ = 0`, `max(1 - α, 0)`. Never folded into [`mp_density`].
pub fn mp_atom(alpha: f64) -> f64 {
    (1.0 - alpha).max(0.0)
}

/// Continuous part `√([λ₊-λ]⁺ [λ-λ₋]⁺) / (2π λ v)`.
pub fn mp_density(alpha: f64, v: f64, lambda: f64) -> Result<f64> {
    let (lo, hi) = mp_edges(alpha, v)?;
    if lambda < 0.0 || lambda.is_nan() {
        return Err(Error::Domain(format!("MP density needs lambda >= 0, got {lambda}")));
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let a = (hi - lambda).max(0.0) * (lambda - lo).max(0.0);
    Ok(a.sqrt() / (2.0 * std::f64::consts::PI * lambda * v))
}

/// Closed-form resolvent: the root of `z v χ² + (αv - v - z) χ + 1 = 0` on the
/// retarded branch (`Im χ ≤ 0` for `Im z > 0`).
pub fn mp_resolvent(alpha: f64, v: f64, z: Complex64) -> Result<Complex64> {
    check(alpha, v)?;
    if z.im <= 0.0 {
        return Err(Error::Domain(format!("resolvent needs Im z > 0, got {z}")));
    }
    let b = z + v - alpha * v;
    let disc = (b * b - 4.0 * z * v).sqrt();
    let r1 = (b + disc) / (2.0 * z * v);
    let r2 = (b - disc) / (2.0 * z * v);
    // Exactly one root is a Stieltjes transform; pick the one in the lower half plane.
    Ok(if r1.im < r2.im { r1 } else { r2 })
}

/// Closed-form MP curve on `grid`, with `χ_w` from [`mp_resolvent`].
pub fn mp_density_curve(alpha: f64, v: f64, grid: &LambdaGrid) -> Result<DensityCurve> {
    let entries = grid
        .points()
        .iter()
        .map(|p| {
            Ok(CurveEntry {
                lambda: p.lambda,
                rho: mp_density(alpha, v, p.lambda)?,
                chi_w: mp_resolvent(alpha, v, p.z())?,
                iterations: 0,
                converged: true,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityCurve::new(
        entries,
        Method::Mp,
        Some(EnsembleSpec::marchenko_pastur(alpha, v)?),
    ))
}
