//! Deterministic asymptotic densities from the replica-symmetric saddle point,
//! the Marčenko–Pastur closed form and the inverse-moment identities.

mod curve;
mod moments;
mod mp;
mod solvers;

#[cfg(test)]
mod tests;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use curve::{replica_density_curve, replica_density_curve_extrapolated};
pub use moments::{inverse_moments_case1, portfolio_quantities, InverseMoments, PortfolioQuantities};
pub use mp::{mp_atom, mp_density, mp_density_curve, mp_edges, mp_resolvent};
pub use solvers::{solve_case1, solve_case2, solve_case3, solve_point, SINGULAR_FLOOR};

use crate::error::{Error, Result};
use crate::numeric::{SpectralPoint, NEGATIVE_TOLERANCE};

/// Order parameters at one spectral point.
///
/// For the column-variance case `chi_s` equals `chi_w` and `alpha * chi_t` is
/// the conjugate field `χ̃_w`; for the row-variance case `chi_t = chi_u = 1/(chi_s - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderParams {
    pub chi_w: Complex64,
    pub chi_s: Complex64,
    pub chi_u: Complex64,
    pub chi_t: Complex64,
    pub point: SpectralPoint,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
}

impl OrderParams {
    /// Residuals of `χ_s α χ_t = 1 - z χ_w` and `χ_t χ_s = 1 + χ_u`.
    pub fn consistency_residuals(&self, alpha: f64) -> (f64, f64) {
        let z = self.point.z();
        let r1 = (self.chi_s * alpha * self.chi_t - (1.0 - z * self.chi_w)).norm();
        let r2 = (self.chi_t * self.chi_s - (1.0 + self.chi_u)).norm();
        (r1, r2)
    }
}

/// `ρ = -Im(χ_w)/π`, clamping roundoff negatives.
pub fn density_from_chi(params: &OrderParams) -> Result<f64> {
    density_from_resolvent(params.chi_w, params.point.lambda)
}

pub fn density_from_resolvent(chi_w: Complex64, lambda: f64) -> Result<f64> {
    let rho = -chi_w.im / std::f64::consts::PI;
    if rho >= 0.0 {
        Ok(rho)
    } else if rho > -NEGATIVE_TOLERANCE {
        Ok(0.0)
    } else {
        Err(Error::NegativeDensity { lambda, rho })
    }
}
