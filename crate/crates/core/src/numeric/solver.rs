//! Damped fixed-point iteration over small complex vectors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Weight of the new map value: `x <- (1 - damping) x + damping f(x)`.
    pub damping: f64,
    /// Component-wise stopping criterion on `|f(x) - x|`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub warm_start: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tolerance: 1e-12,
            max_iterations: 100_000,
            warm_start: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::InvalidInput(format!(
                "tolerance must lie in (0, 1), got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput("max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub solution: Vec<Complex64>,
    /// Number of map evaluations performed.
    pub iterations: usize,
    pub converged: bool,
    /// `max_i |f(x)_i - x_i|` at the returned iterate.
    pub residual: f64,
}

/// Iterates `x <- (1 - d) x + d map(x)` until every component of
/// `map(x) - x` is within `cfg.tolerance`.
///
/// `map` writes its value into the output slice and may fail (for instance on
/// a singular denominator); such errors propagate unchanged. On budget
/// exhaustion the iterate with the smallest residual is returned with
/// `converged = false`.
pub fn damped_fixed_point<F>(mut map: F, init: &[Complex64], cfg: &SolverConfig) -> Result<FixedPoint>
where
    F: FnMut(&[Complex64], &mut [Complex64]) -> Result<()>,
{
    cfg.validate()?;
    let mut x = init.to_vec();
    let mut fx = vec![Complex64::new(0.0, 0.0); x.len()];
    let mut best = (f64::INFINITY, x.clone());
    let d = cfg.damping;

    for iteration in 1..=cfg.max_iterations {
        map(&x, &mut fx)?;
        if fx.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFiniteIterate { iteration });
        }
        let residual = x
            .iter()
            .zip(&fx)
            .map(|(a, b)| (b - a).norm())
            .fold(0.0, f64::max);
        if residual <= cfg.tolerance {
            return Ok(FixedPoint {
                solution: x,
                iterations: iteration,
                converged: true,
                residual,
            });
        }
        if residual < best.0 {
            best.0 = residual;
            best.1.copy_from_slice(&x);
        }
        for (xi, fi) in x.iter_mut().zip(&fx) {
            *xi = *xi * (1.0 - d) + *fi * d;
        }
    }

    Ok(FixedPoint {
        solution: best.1,
        iterations: cfg.max_iterations,
        converged: false,
        residual: best.0,
    })
}

/// Scalar convenience wrapper around [`damped_fixed_point`].
pub fn damped_fixed_point_scalar<F>(mut map: F, init: Complex64, cfg: &SolverConfig) -> Result<FixedPoint>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    damped_fixed_point(
        |x, out| {
            out[0] = map(x[0])?;
            Ok(())
        },
        &[init],
        cfg,
    )
}
