//! Replica-symmetric saddle-point iterations for the three covariance cases.
//!
//! Every case is reduced to a damped iteration on a single complex unknown:
//!
//! * row variances: `χ_s ← < s / (z + α s / (χ_s - 1)) >_s`
//! * column variances: `χ_w ← 1 / (z + α < t / (t χ_w - 1) >_t)`
//! * Kronecker: `χ_s ← < s / (z + α s χ_t(χ_s)) >_s` with
//!   `χ_t(χ_s) = < t / (t χ_s - 1) >_t`
//!
//! where `z = λ + iε`.

use num_complex::Complex64;

use super::OrderParams;
use crate::ensembles::{EnsembleSpec, HyperparameterLaw, LawQuadrature, Structure, DEFAULT_QUADRATURE_NODES};
use crate::error::{Error, Result};
use crate::numeric::{damped_fixed_point_scalar, SolverConfig, SpectralPoint};

/// Magnitude below which a denominator is treated as having underflowed.
pub const SINGULAR_FLOOR: f64 = 1e-300;

/// Laws discretized once so a sweep does not rebuild quadratures per point.
#[derive(Debug, Clone)]
pub(crate) enum PreparedCase {
    RowVariance { qs: LawQuadrature },
    ColumnVariance { qt: LawQuadrature },
    Kronecker { qs: LawQuadrature, qt: LawQuadrature },
}

impl PreparedCase {
    pub(crate) fn new(spec: &EnsembleSpec) -> Result<Self> {
        spec.validate()?;
        let q = |law: &HyperparameterLaw| law.quadrature(DEFAULT_QUADRATURE_NODES);
        Ok(match &spec.structure {
            Structure::RowVariance { law_s } => Self::RowVariance { qs: q(law_s)? },
            Structure::ColumnVariance { law_t } => Self::ColumnVariance { qt: q(law_t)? },
            Structure::Kronecker { law_s, law_t, .. } => Self::Kronecker {
                qs: q(law_s)?,
                qt: q(law_t)?,
            },
        })
    }

    /// Large-`λ` starting value of the iterated unknown.
    pub(crate) fn asymptotic_init(&self, z: Complex64) -> Complex64 {
        match self {
            Self::RowVariance { qs } | Self::Kronecker { qs, .. } => {
                let mean: f64 = qs.nodes.iter().zip(&qs.weights).map(|(s, w)| s * w).sum();
                mean / z
            }
            Self::ColumnVariance { .. } => 1.0 / z,
        }
    }

    /// Solves one point. Non-convergence is reported through the flag, not an error.
    pub(crate) fn solve(
        &self,
        alpha: f64,
        point: SpectralPoint,
        cfg: &SolverConfig,
        init: Option<Complex64>,
    ) -> Result<OrderParams> {
        let z = point.z();
        let init = init.unwrap_or_else(|| self.asymptotic_init(z));
        match self {
            Self::RowVariance { qs } => {
                let fp = damped_fixed_point_scalar(|chi_s| row_map(qs, alpha, z, chi_s), init, cfg)?;
                let chi_s = fp.solution[0];
                let inv = 1.0 / checked(chi_s - 1.0, "chi_s - 1")?;
                let chi_w = qs.expect(|s| 1.0 / (z + alpha * s * inv))?;
                Ok(OrderParams {
                    chi_w,
                    chi_s,
                    chi_u: inv,
                    chi_t: inv,
                    point,
                    iterations: fp.iterations,
                    converged: fp.converged,
                    residual: fp.residual,
                })
            }
            Self::ColumnVariance { qt } => {
                let fp = damped_fixed_point_scalar(
                    |chi_w| {
                        let chi_t = column_bracket(qt, chi_w)?;
                        Ok(1.0 / (z + alpha * chi_t))
                    },
                    init,
                    cfg,
                )?;
                let chi_w = fp.solution[0];
                let chi_t = column_bracket(qt, chi_w)?;
                let chi_u = qt.expect(|t| 1.0 / (t * chi_w - 1.0))?;
                Ok(OrderParams {
                    chi_w,
                    chi_s: chi_w,
                    chi_u,
                    chi_t,
                    point,
                    iterations: fp.iterations,
                    converged: fp.converged,
                    residual: fp.residual,
                })
            }
            Self::Kronecker { qs, qt } => {
                let fp = damped_fixed_point_scalar(
                    |chi_s| {
                        let chi_t = column_bracket(qt, chi_s)?;
                        qs.expect(|s| s / (z + alpha * s * chi_t))
                    },
                    init,
                    cfg,
                )?;
                let chi_s = fp.solution[0];
                let chi_t = column_bracket(qt, chi_s)?;
                let chi_w = qs.expect(|s| 1.0 / (z + alpha * s * chi_t))?;
                let chi_u = qt.expect(|t| 1.0 / (t * chi_s - 1.0))?;
                Ok(OrderParams {
                    chi_w,
                    chi_s,
                    chi_u,
                    chi_t,
                    point,
                    iterations: fp.iterations,
                    converged: fp.converged,
                    residual: fp.residual,
                })
            }
        }
    }

    /// The unknown a warm start carries from point to point.
    pub(crate) fn carried(&self, params: &OrderParams) -> Complex64 {
        match self {
            Self::ColumnVariance { .. } => params.chi_w,
            _ => params.chi_s,
        }
    }
}

fn checked(d: Complex64, what: &str) -> Result<Complex64> {
    if d.norm() < SINGULAR_FLOOR {
        Err(Error::SingularDenominator(format!("|{what}| = {:e}", d.norm())))
    } else {
        Ok(d)
    }
}

fn row_map(qs: &LawQuadrature, alpha: f64, z: Complex64, chi_s: Complex64) -> Result<Complex64> {
    let inv = 1.0 / checked(chi_s - 1.0, "chi_s - 1")?;
    qs.expect(|s| s / (z + alpha * s * inv))
}

/// `< t / (t χ - 1) >_t`, refusing to divide by an underflowed `t χ - 1`.
fn column_bracket(qt: &LawQuadrature, chi: Complex64) -> Result<Complex64> {
    for &t in &qt.nodes {
        checked(t * chi - 1.0, "t chi - 1").map_err(|e| match e {
            Error::SingularDenominator(m) => Error::SingularDenominator(format!("{m} at node t = {t}")),
            other => other,
        })?;
    }
    qt.expect(|t| t / (t * chi - 1.0))
}

fn into_result(params: OrderParams, carried: Complex64) -> Result<OrderParams> {
    if params.converged {
        Ok(params)
    } else {
        Err(Error::NonConvergence {
            iterations: params.iterations,
            residual: params.residual,
            best: vec![carried, params.chi_w],
        })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("alpha must be > 0, got {alpha}")))
    }
}

/// Row-variance case: `E[x_{iμ} x_{jν}] = s_i δ_{ij} δ_{μν}`.
///
/// `init` seeds `χ_s`; by default the large-`λ` asymptote `<s>/z`.
pub fn solve_case1(
    law_s: &HyperparameterLaw,
    alpha: f64,
    point: SpectralPoint,
    cfg: &SolverConfig,
    init: Option<Complex64>,
) -> Result<OrderParams> {
    check_alpha(alpha)?;
    let case = PreparedCase::RowVariance {
        qs: law_s.quadrature(DEFAULT_QUADRATURE_NODES)?,
    };
    let p = case.solve(alpha, point, cfg, init)?;
    let carried = case.carried(&p);
    into_result(p, carried)
}

/// Column-variance case: `E[x_{iμ} x_{jν}] = t_μ δ_{ij} δ_{μν}`.
///
/// `init` seeds `χ_w`; by default `1/z`. The conjugate `χ̃_w` equals `α · chi_t`.
pub fn solve_case2(
    law_t: &HyperparameterLaw,
    alpha: f64,
    point: SpectralPoint,
    cfg: &SolverConfig,
    init: Option<Complex64>,
) -> Result<OrderParams> {
    check_alpha(alpha)?;
    let case = PreparedCase::ColumnVariance {
        qt: law_t.quadrature(DEFAULT_QUADRATURE_NODES)?,
    };
    let p = case.solve(alpha, point, cfg, init)?;
    let carried = case.carried(&p);
    into_result(p, carried)
}

/// Kronecker case with diagonalized `M` and `Θ` (the rotations drop out).
///
/// `init` seeds `χ_s`; `χ_t` is always recomputed from it.
pub fn solve_case3(
    law_s: &HyperparameterLaw,
    law_t: &HyperparameterLaw,
    alpha: f64,
    point: SpectralPoint,
    cfg: &SolverConfig,
    init: Option<Complex64>,
) -> Result<OrderParams> {
    check_alpha(alpha)?;
    let case = PreparedCase::Kronecker {
        qs: law_s.quadrature(DEFAULT_QUADRATURE_NODES)?,
        qt: law_t.quadrature(DEFAULT_QUADRATURE_NODES)?,
    };
    let p = case.solve(alpha, point, cfg, init)?;
    let carried = case.carried(&p);
    into_result(p, carried)
}

/// Dispatches on the ensemble's structure.
pub fn solve_point(
    spec: &EnsembleSpec,
    point: SpectralPoint,
    cfg: &SolverConfig,
    init: Option<Complex64>,
) -> Result<OrderParams> {
    let case = PreparedCase::new(spec)?;
    let p = case.solve(spec.alpha, point, cfg, init)?;
    let carried = case.carried(&p);
    into_result(p, carried)
}
