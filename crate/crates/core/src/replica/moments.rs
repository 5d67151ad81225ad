//! Closed-form inverse moments of the row-variance density and the two
//! portfolio-optimization quantities derived from them.

use serde::{Deserialize, Serialize};

use crate::ensembles::{HyperparameterLaw, DEFAULT_QUADRATURE_NODES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseMoments {
    /// `<λ⁻¹>`
    pub m1: f64,
    /// `<λ⁻²>`
    pub m2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortfolioQuantities {
    pub epsilon_min: f64,
    pub q_w: f64,
}

/// `(<s⁻¹>, <s⁻²>)` after checking `α > 1` and a strictly positive support.
fn inverse_brackets(law_s: &HyperparameterLaw, alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 1.0) {
        return Err(Error::Domain(format!("moment identities require α > 1, got {alpha}")));
    }
    law_s.validate()?;
    if !(law_s.support_min() > 0.0) {
        return Err(Error::Domain(format!(
            "inverse moments need a law supported away from 0, got {law_s:?}"
        )));
    }
    let q = law_s.quadrature(DEFAULT_QUADRATURE_NODES)?;
    Ok((q.expect_real(|s| 1.0 / s)?, q.expect_real(|s| 1.0 / (s * s))?))
}

/// `<λ⁻¹> = <s⁻¹>/(α-1)` and `<λ⁻²> = <s⁻¹>²/(α-1)³ + <s⁻²>/(α-1)²`.
pub fn inverse_moments_case1(law_s: &HyperparameterLaw, alpha: f64) -> Result<InverseMoments> {
    let (inv1, inv2) = inverse_brackets(law_s, alpha)?;
    let a = alpha - 1.0;
    Ok(InverseMoments {
        m1: inv1 / a,
        m2: inv1 * inv1 / a.powi(3) + inv2 / (a * a),
    })
}

/// `ε = (α-1)/(2<s⁻¹>)` and `q_w = <s⁻²>/<s⁻¹>² + 1/(α-1)`.
pub fn portfolio_quantities(law_s: &HyperparameterLaw, alpha: f64) -> Result<PortfolioQuantities> {
    let (inv1, inv2) = inverse_brackets(law_s, alpha)?;
    Ok(PortfolioQuantities {
        epsilon_min: (alpha - 1.0) / (2.0 * inv1),
        q_w: inv2 / (inv1 * inv1) + 1.0 / (alpha - 1.0),
    })
}
