//! Dense symmetric eigenvalues by Householder reduction to tridiagonal form
//! followed by Sturm-sequence bisection.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative asymmetry above which a matrix is rejected as non-symmetric.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Absolute eigenvalue tolerance used when none is given.
pub const DEFAULT_BISECTION_TOLERANCE: f64 = 1e-10;

/// Symmetric tridiagonal matrix: `diag` has `N` entries, `offdiag` has `N - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

/// `max |a_ij - a_ji|` relative to `max |a_ij|`; errors if it exceeds [`SYMMETRY_TOLERANCE`].
pub(crate) fn check_symmetric(a: &DMatrix<f64>, what: &str) -> Result<()> {
    if !a.is_square() {
        return Err(Error::InvalidInput(format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let scale = a.amax();
    if !scale.is_finite() {
        return Err(Error::InvalidInput(format!("{what} has non-finite entries")));
    }
    let n = a.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if worst > SYMMETRY_TOLERANCE * scale {
        return Err(Error::Domain(format!(
            "{what} is not symmetric: max asymmetry {worst:e} against scale {scale:e}"
        )));
    }
    Ok(())
}

/// Orthogonal similarity `Qᵀ A Q = T` with `T` tridiagonal.
///
/// Works on a row-major copy so every inner loop runs over contiguous memory.
pub fn householder_tridiagonalize(a: &DMatrix<f64>) -> Result<Tridiagonal> {
    check_symmetric(a, "matrix")?;
    let n = a.nrows();
    if n == 0 {
        return Ok(Tridiagonal {
            diag: vec![],
            offdiag: vec![],
        });
    }
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            w[i * n + j] = 0.5 * (a[(i, j)] + a[(j, i)]);
        }
    }

    let mut offdiag = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let lo = k + 1;
        let norm = (lo..n).map(|i| w[i * n + k].powi(2)).sum::<f64>().sqrt();
        if norm == 0.0 {
            offdiag[k] = 0.0;
            continue;
        }
        let x0 = w[lo * n + k];
        let beta = if x0 >= 0.0 { -norm } else { norm };
        for i in lo..n {
            v[i] = w[i * n + k];
        }
        v[lo] -= beta;
        let vnorm = (lo..n).map(|i| v[i] * v[i]).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            offdiag[k] = x0;
            continue;
        }
        for vi in &mut v[lo..n] {
            *vi /= vnorm;
        }

        // H = I - 2 v vᵀ on the trailing block: B ← B - v qᵀ - q vᵀ with
        // p = 2 B v and q = p - (vᵀ p) v.
        for i in lo..n {
            let row = &w[i * n + lo..i * n + n];
            p[i] = 2.0 * row.iter().zip(&v[lo..n]).map(|(a, b)| a * b).sum::<f64>();
        }
        let vp: f64 = (lo..n).map(|i| v[i] * p[i]).sum();
        for i in lo..n {
            p[i] -= vp * v[i];
        }
        for i in lo..n {
            let (vi, qi) = (v[i], p[i]);
            let row = &mut w[i * n + lo..i * n + n];
            for ((r, &vj), &qj) in row.iter_mut().zip(&v[lo..n]).zip(&p[lo..n]) {
                *r -= vi * qj + qi * vj;
            }
        }
        offdiag[k] = beta;
        for i in (lo + 1)..n {
            w[i * n + k] = 0.0;
            w[k * n + i] = 0.0;
        }
    }
    if n >= 2 {
        offdiag[n - 2] = w[(n - 1) * n + (n - 2)];
    }
    let diag = (0..n).map(|i| w[i * n + i]).collect();
    Ok(Tridiagonal { diag, offdiag })
}

fn check_tridiagonal(diag: &[f64], offdiag: &[f64]) -> Result<()> {
    if diag.len() != offdiag.len() + 1 && !(diag.is_empty() && offdiag.is_empty()) {
        return Err(Error::InvalidInput(format!(
            "tridiagonal form needs len(offdiag) = len(diag) - 1, got {} and {}",
            diag.len(),
            offdiag.len()
        )));
    }
    if diag.iter().chain(offdiag).any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("tridiagonal form has non-finite entries".into()));
    }
    Ok(())
}

/// Interval containing every eigenvalue, from Gershgorin discs widened by a few ulps.
pub fn gershgorin_bounds(diag: &[f64], offdiag: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { offdiag[i - 1].abs() } else { 0.0 } + offdiag.get(i).map_or(0.0, |e| e.abs());
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let pad = 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) * n as f64 + f64::MIN_POSITIVE;
    (lo - pad, hi + pad)
}

/// Number of eigenvalues strictly below `x` (sign changes of the Sturm sequence).
pub fn sturm_count(diag: &[f64], offdiag: &[f64], x: f64) -> usize {
    let e2: Vec<f64> = offdiag.iter().map(|e| e * e).collect();
    sturm_counts(diag, &e2, pivot_floor(&e2), [x])[0]
}

fn pivot_floor(e2: &[f64]) -> f64 {
    f64::MIN_POSITIVE * e2.iter().copied().fold(1.0, f64::max)
}

/// Sturm counts at `L` shifts in one sweep; the independent recurrences
/// overlap their division latencies.
fn sturm_counts<const L: usize>(diag: &[f64], e2: &[f64], pivmin: f64, xs: [f64; L]) -> [usize; L] {
    let mut count = [0usize; L];
    let mut q = [1.0f64; L];
    for (i, &d) in diag.iter().enumerate() {
        let e = if i > 0 { e2[i - 1] } else { 0.0 };
        for j in 0..L {
            let mut v = d - xs[j] - e / q[j];
            if v.abs() < pivmin {
                v = -pivmin;
            }
            count[j] += (v < 0.0) as usize;
            q[j] = v;
        }
    }
    count
}

/// Eigenvalues bisected together in one Sturm sweep.
const LANES: usize = 8;

/// All eigenvalues of a symmetric tridiagonal matrix, ascending, each located
/// by bisection to within `abs_tol`.
pub fn sturm_bisection_eigenvalues(diag: &[f64], offdiag: &[f64], abs_tol: f64) -> Result<Vec<f64>> {
    if !(abs_tol > 0.0) {
        return Err(Error::Domain(format!("bisection tolerance must be > 0, got {abs_tol}")));
    }
    check_tridiagonal(diag, offdiag)?;
    let n = diag.len();
    if n == 0 {
        return Ok(vec![]);
    }
    let (glo, ghi) = gershgorin_bounds(diag, offdiag);
    let e2: Vec<f64> = offdiag.iter().map(|e| e * e).collect();
    let pivmin = pivot_floor(&e2);

    // Groups of consecutive indices are bisected together, from the top down.
    // Each count tightens every bracket in the group, and a finished group
    // caps the brackets of the group below it.
    let mut out = vec![0.0; n];
    let mut cap = ghi;
    let mut top = n;
    while top > 0 {
        let base = top.saturating_sub(LANES);
        let mut lo = [glo; LANES];
        let mut hi = [cap; LANES];
        loop {
            let mut mids = [0.0; LANES];
            let mut active = false;
            for j in 0..LANES {
                let m = 0.5 * (lo[j] + hi[j]);
                mids[j] = m;
                active |= base + j < top && hi[j] - lo[j] > abs_tol && m > lo[j] && m < hi[j];
            }
            if !active {
                break;
            }
            let counts = sturm_counts(diag, &e2, pivmin, mids);
            for (&c, &m) in counts.iter().zip(&mids) {
                for j in 0..LANES {
                    if c <= base + j {
                        lo[j] = lo[j].max(m);
                    } else {
                        hi[j] = hi[j].min(m);
                    }
                }
            }
        }
        for k in base..top {
            out[k] = 0.5 * (lo[k - base] + hi[k - base]);
        }
        cap = hi[0];
        top = base;
    }
    Ok(out)
}

/// Householder reduction followed by bisection.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>, abs_tol: f64) -> Result<Vec<f64>> {
    let t = householder_tridiagonalize(a)?;
    sturm_bisection_eigenvalues(&t.diag, &t.offdiag, abs_tol)
}
