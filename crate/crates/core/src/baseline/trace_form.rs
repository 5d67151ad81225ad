//! Order parameters of a given pair of covariance matrices from the trace form
//! of the saddle-point equations, with explicit matrix inversion.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::eigen::check_symmetric;
use crate::error::{Error, Result};
use crate::numeric::{damped_fixed_point_scalar, SolverConfig, SpectralPoint};
use crate::replica::{OrderParams, SINGULAR_FLOOR};

/// `(1/n) Tr[a I + b A]⁻¹` for a fixed symmetric `A`, by scalar sums when `A`
/// is diagonal and by LU inversion otherwise.
enum ShiftedTrace {
    Diagonal(Vec<f64>),
    Dense(DMatrix<Complex64>),
}

impl ShiftedTrace {
    fn new(a: &DMatrix<f64>) -> Self {
        let n = a.nrows();
        let diagonal = (0..n).all(|j| (0..n).all(|i| i == j || a[(i, j)] == 0.0));
        if diagonal {
            Self::Diagonal(a.diagonal().iter().copied().collect())
        } else {
            Self::Dense(a.map(|x| Complex64::new(x, 0.0)))
        }
    }

    fn dim(&self) -> usize {
        match self {
            Self::Diagonal(d) => d.len(),
            Self::Dense(m) => m.nrows(),
        }
    }

    fn trace_inverse(&self, shift: Complex64, scale: Complex64, what: &str) -> Result<Complex64> {
        let n = self.dim() as f64;
        match self {
            Self::Diagonal(d) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for &x in d {
                    let den = shift + scale * x;
                    if den.norm() < SINGULAR_FLOOR {
                        return Err(Error::SingularShift(format!("{what}: pivot {den} at entry {x}")));
                    }
                    acc += 1.0 / den;
                }
                Ok(acc / n)
            }
            Self::Dense(m) => {
                let mut shifted = m * scale;
                for i in 0..m.nrows() {
                    shifted[(i, i)] += shift;
                }
                let inv = shifted
                    .lu()
                    .try_inverse()
                    .ok_or_else(|| Error::SingularShift(format!("{what}: LU found a zero pivot")))?;
                let tr = inv.trace();
                if !tr.re.is_finite() || !tr.im.is_finite() {
                    return Err(Error::SingularShift(format!("{what}: inverse is not finite")));
                }
                Ok(tr / n)
            }
        }
    }
}

/// Damped iteration on `χ_t` of
///
/// * `χ_w = (1/N) Tr[z I_N + α χ_t M]⁻¹`
/// * `χ_s = (1 - z χ_w) / (α χ_t)`
/// * `χ_u = (1/p) Tr[χ_s Θ - I_p]⁻¹`
/// * `χ_t = (1 + χ_u) / χ_s`
///
/// with `α = p/N`, starting from the large-`λ` value `χ_t = -Tr Θ / p`.
///
/// Each pass inverts one `N×N` and one `p×p` complex matrix unless the
/// corresponding factor is diagonal, so this is an accuracy reference for
/// small instances rather than a production path. Both factors must be
/// symmetric positive semi-definite; only symmetry is checked.
pub fn trace_form_resolvent(
    m: &DMatrix<f64>,
    theta: &DMatrix<f64>,
    point: SpectralPoint,
    cfg: &SolverConfig,
) -> Result<OrderParams> {
    cfg.validate()?;
    check_symmetric(m, "M")?;
    check_symmetric(theta, "Θ")?;
    let (n, p) = (m.nrows(), theta.nrows());
    if n == 0 || p == 0 {
        return Err(Error::InvalidInput("covariance factors must be non-empty".into()));
    }
    let alpha = p as f64 / n as f64;
    let z = point.z();
    let rows = ShiftedTrace::new(m);
    let cols = ShiftedTrace::new(theta);
    let one = Complex64::new(1.0, 0.0);

    let fields = |chi_t: Complex64| -> Result<(Complex64, Complex64, Complex64)> {
        if (alpha * chi_t).norm() < SINGULAR_FLOOR {
            return Err(Error::SingularDenominator(format!("|α χ_t| = {:e}", (alpha * chi_t).norm())));
        }
        let chi_w = rows.trace_inverse(z, alpha * chi_t, "z I + α χ_t M")?;
        let chi_s = (1.0 - z * chi_w) / (alpha * chi_t);
        if chi_s.norm() < SINGULAR_FLOOR {
            return Err(Error::SingularDenominator(format!("|χ_s| = {:e}", chi_s.norm())));
        }
        let chi_u = cols.trace_inverse(-one, chi_s, "χ_s Θ - I")?;
        Ok((chi_w, chi_s, chi_u))
    };

    let init = Complex64::new(-theta.trace() / p as f64, 0.0);
    let fp = damped_fixed_point_scalar(
        |chi_t| {
            let (_, chi_s, chi_u) = fields(chi_t)?;
            Ok((1.0 + chi_u) / chi_s)
        },
        init,
        cfg,
    )?;
    let chi_t = fp.solution[0];
    let (chi_w, chi_s, chi_u) = fields(chi_t)?;
    if !fp.converged {
        return Err(Error::NonConvergence {
            iterations: fp.iterations,
            residual: fp.residual,
            best: vec![chi_t, chi_w],
        });
    }
    Ok(OrderParams {
        chi_w,
        chi_s,
        chi_u,
        chi_t,
        point,
        iterations: fp.iterations,
        converged: true,
        residual: fp.residual,
    })
}

/// Diagonal matrix from a slice, for callers holding variance draws.
pub fn diagonal_matrix(values: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(values))
}
