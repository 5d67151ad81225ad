//! Belief propagation on one realized matrix.
//!
//! Per row `k` and column `μ` the messages obey
//!
//! ```text
//! χ_wk = 1 / (z + χ̃_wk),      χ̃_wk = Σ_μ x²_kμ χ_uμ
//! χ_uμ = 1 / (χ̃_uμ - 1),      χ̃_uμ = Σ_k x²_kμ χ_wk
//! ```
//!
//! with `x` the `1/√N`-scaled entries, and `ρ(λ|X) = -Im(mean_k χ_wk)/π`.
//! Only the squared entries are read: the covariance factors of the sample
//! are never consulted.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::ensembles::{sample_matrix, EnsembleSpec, SampledEnsemble};
use crate::error::{Error, Result};
use crate::numeric::{CurveEntry, DensityCurve, LambdaGrid, Method, SolverConfig, SpectralPoint};
use crate::replica::density_from_resolvent;

/// Squared entries `x²_kμ`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquaredEntries {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
}

impl SquaredEntries {
    pub fn new(sample: &SampledEnsemble) -> Self {
        let (n, p) = sample.matrix.shape();
        let mut values = Vec::with_capacity(n * p);
        for k in 0..n {
            values.extend(sample.matrix.row(k).iter().map(|x| x * x));
        }
        Self {
            n_rows: n,
            n_cols: p,
            values,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.n_cols..(k + 1) * self.n_cols]
    }

    /// One synchronous pass: `out_w[k] = Σ_μ x²_kμ u[μ]` and
    /// `out_u[μ] = Σ_k x²_kμ w[k]`, both from the same (old) messages.
    fn fields(&self, w: &Split, u: &Split, out_w: &mut Split, out_u: &mut Split) {
        out_u.re.fill(0.0);
        out_u.im.fill(0.0);
        for k in 0..self.n_rows {
            let row = self.row(k);
            let (wr, wi) = (w.re[k], w.im[k]);
            let mut acc = [0.0f64; 8];
            let chunks = row.len() / 4 * 4;
            let (ur, ui) = (&u.re[..], &u.im[..]);
            let (tr, ti) = (&mut out_u.re[..], &mut out_u.im[..]);
            let mut j = 0;
            while j < chunks {
                for l in 0..4 {
                    let a = row[j + l];
                    acc[l] += a * ur[j + l];
                    acc[4 + l] += a * ui[j + l];
                    tr[j + l] += a * wr;
                    ti[j + l] += a * wi;
                }
                j += 4;
            }
            let (mut sr, mut si) = (acc[0] + acc[1] + acc[2] + acc[3], acc[4] + acc[5] + acc[6] + acc[7]);
            for j in chunks..row.len() {
                let a = row[j];
                sr += a * ur[j];
                si += a * ui[j];
                tr[j] += a * wr;
                ti[j] += a * wi;
            }
            out_w.re[k] = sr;
            out_w.im[k] = si;
        }
    }
}

/// Complex vector stored as separate real and imaginary parts.
#[derive(Debug, Clone)]
struct Split {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Split {
    fn zeros(n: usize) -> Self {
        Self {
            re: vec![0.0; n],
            im: vec![0.0; n],
        }
    }

    fn from_complex(v: &[Complex64]) -> Self {
        Self {
            re: v.iter().map(|c| c.re).collect(),
            im: v.iter().map(|c| c.im).collect(),
        }
    }

    fn get(&self, i: usize) -> Complex64 {
        Complex64::new(self.re[i], self.im[i])
    }

    fn set(&mut self, i: usize, c: Complex64) {
        self.re[i] = c.re;
        self.im[i] = c.im;
    }

    fn to_complex(&self) -> Vec<Complex64> {
        (0..self.re.len()).map(|i| self.get(i)).collect()
    }
}

/// Per-row and per-column messages at one spectral point.
#[derive(Debug, Clone, PartialEq)]
pub struct BpState {
    pub chi_w_per_row: Vec<Complex64>,
    pub chi_tilde_w_per_row: Vec<Complex64>,
    pub chi_u_per_col: Vec<Complex64>,
    pub chi_tilde_u_per_col: Vec<Complex64>,
    pub point: SpectralPoint,
    pub iterations: usize,
    pub converged: bool,
    /// Largest message change in the last damped step.
    pub residual: f64,
}

impl BpState {
    /// `(1/N) Σ_k χ_wk`.
    pub fn chi_w(&self) -> Complex64 {
        mean(&self.chi_w_per_row)
    }

    /// `(1/p) Σ_μ χ_uμ`.
    pub fn chi_u(&self) -> Complex64 {
        mean(&self.chi_u_per_col)
    }
}

fn mean(v: &[Complex64]) -> Complex64 {
    v.iter().sum::<Complex64>() / v.len() as f64
}

/// Damped synchronous message passing at one point.
///
/// Default start is `χ_wk = 1/z`, `χ_uμ = -1`. Convergence means every
/// `|Δχ_wk|` and `|Δχ_uμ|` is within `cfg.tolerance`; the returned state then
/// comes from one final undamped half-step, so `χ_wk = 1/(z + χ̃_wk)` and
/// `χ_uμ = 1/(χ̃_uμ - 1)` hold exactly. Running out of iterations is not an
/// error: the state is returned with `converged = false`.
pub fn bp_solve_point(
    sample: &SampledEnsemble,
    point: SpectralPoint,
    cfg: &SolverConfig,
    init: Option<&BpState>,
) -> Result<BpState> {
    bp_solve_point_with(&SquaredEntries::new(sample), point, cfg, init)
}

/// [`bp_solve_point`] on precomputed squared entries.
pub fn bp_solve_point_with(
    x2: &SquaredEntries,
    point: SpectralPoint,
    cfg: &SolverConfig,
    init: Option<&BpState>,
) -> Result<BpState> {
    cfg.validate()?;
    let (n, p) = x2.shape();
    let z = point.z();
    let (mut w, mut u) = match init {
        Some(s) if s.chi_w_per_row.len() == n && s.chi_u_per_col.len() == p => {
            (Split::from_complex(&s.chi_w_per_row), Split::from_complex(&s.chi_u_per_col))
        }
        Some(_) => {
            return Err(Error::InvalidInput("warm-start state has the wrong shape".into()));
        }
        None => (
            Split::from_complex(&vec![1.0 / z; n]),
            Split::from_complex(&vec![Complex64::new(-1.0, 0.0); p]),
        ),
    };
    let mut tw = Split::zeros(n);
    let mut tu = Split::zeros(p);
    let d = cfg.damping;
    let mut converged = false;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;

    for it in 1..=cfg.max_iterations {
        iterations = it;
        x2.fields(&w, &u, &mut tw, &mut tu);
        let mut delta = 0.0f64;
        for k in 0..n {
            let new = 1.0 / (z + tw.get(k));
            let old = w.get(k);
            delta = delta.max((new - old).norm());
            w.set(k, old * (1.0 - d) + new * d);
        }
        for m in 0..p {
            let new = 1.0 / (tu.get(m) - 1.0);
            let old = u.get(m);
            delta = delta.max((new - old).norm());
            u.set(m, old * (1.0 - d) + new * d);
        }
        if !delta.is_finite() {
            return Err(Error::NonFiniteIterate { iteration: it });
        }
        residual = delta;
        if delta <= cfg.tolerance {
            converged = true;
            break;
        }
    }

    // Final half-step: fields from the last messages, then exact messages.
    x2.fields(&w, &u, &mut tw, &mut tu);
    let mut chi_w = vec![Complex64::new(0.0, 0.0); n];
    for (k, c) in chi_w.iter_mut().enumerate() {
        *c = 1.0 / (z + tw.get(k));
    }
    let w_final = Split::from_complex(&chi_w);
    let mut dummy = Split::zeros(n);
    x2.fields(&w_final, &u, &mut dummy, &mut tu);
    let chi_u: Vec<Complex64> = (0..p).map(|m| 1.0 / (tu.get(m) - 1.0)).collect();

    Ok(BpState {
        chi_w_per_row: chi_w,
        chi_tilde_w_per_row: tw.to_complex(),
        chi_u_per_col: chi_u,
        chi_tilde_u_per_col: tu.to_complex(),
        point,
        iterations,
        converged,
        residual,
    })
}

/// `-Im(mean χ_wk)/π`, clamped like the replica density.
pub fn bp_density_point(state: &BpState) -> Result<f64> {
    density_from_resolvent(state.chi_w(), state.point.lambda)
}

/// Warm-started sweep of [`bp_solve_point`] over `grid` for one sample.
pub fn bp_density_curve(sample: &SampledEnsemble, grid: &LambdaGrid, cfg: &SolverConfig) -> Result<DensityCurve> {
    let x2 = SquaredEntries::new(sample);
    let entries = bp_entries(&x2, grid, cfg)?;
    Ok(DensityCurve::new(
        entries,
        Method::Bp,
        Some(sample.spec.with_alpha(sample.realized_alpha())),
    ))
}

fn bp_entries(x2: &SquaredEntries, grid: &LambdaGrid, cfg: &SolverConfig) -> Result<Vec<CurveEntry>> {
    cfg.validate()?;
    let points = grid.points();
    let solve_entry = |pt: SpectralPoint, init: Option<&BpState>| -> (CurveEntry, Option<BpState>) {
        match bp_solve_point_with(x2, pt, cfg, init) {
            Ok(state) if state.converged => match bp_density_point(&state) {
                Ok(rho) => (
                    CurveEntry {
                        lambda: pt.lambda,
                        rho,
                        chi_w: state.chi_w(),
                        iterations: state.iterations,
                        converged: true,
                    },
                    Some(state),
                ),
                Err(_) => (CurveEntry::failed(pt.lambda, state.chi_w(), state.iterations), None),
            },
            Ok(state) => (CurveEntry::failed(pt.lambda, state.chi_w(), state.iterations), None),
            Err(Error::NonFiniteIterate { iteration }) => (
                CurveEntry::failed(pt.lambda, Complex64::new(f64::NAN, f64::NAN), iteration),
                None,
            ),
            Err(_) => (CurveEntry::failed(pt.lambda, Complex64::new(f64::NAN, f64::NAN), 0), None),
        }
    };

    if cfg.warm_start {
        let mut slots: Vec<Option<CurveEntry>> = vec![None; points.len()];
        let mut carry: Option<BpState> = None;
        for i in grid.sweep_order() {
            let (entry, state) = solve_entry(points[i], carry.as_ref());
            if state.is_some() {
                carry = state;
            }
            slots[i] = Some(entry);
        }
        Ok(slots.into_iter().map(|e| e.expect("every grid index visited")).collect())
    } else {
        Ok(points.par_iter().map(|pt| solve_entry(*pt, None).0).collect())
    }
}

/// Seed-averaged BP density with per-point standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedCurve {
    /// Mean density; a point is converged only if it converged for every seed.
    pub curve: DensityCurve,
    pub std_error: Vec<f64>,
    pub seeds: Vec<u64>,
}

/// Samples one matrix per seed, runs [`bp_density_curve`] on each and averages.
pub fn bp_ensemble_curve(
    spec: &EnsembleSpec,
    n: usize,
    seeds: &[u64],
    grid: &LambdaGrid,
    cfg: &SolverConfig,
) -> Result<AveragedCurve> {
    if seeds.is_empty() {
        return Err(Error::InvalidInput("need at least one seed".into()));
    }
    let per_seed = seeds
        .par_iter()
        .map(|&seed| {
            let sample = sample_matrix(spec, n, seed)?;
            bp_density_curve(&sample, grid, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let realized = per_seed[0].ensemble.clone();
    Ok(average_curves(&per_seed, Method::Bp, realized, seeds.to_vec()))
}

pub(crate) fn average_curves(
    curves: &[DensityCurve],
    method: Method,
    ensemble: Option<EnsembleSpec>,
    seeds: Vec<u64>,
) -> AveragedCurve {
    let k = curves.len() as f64;
    let len = curves[0].len();
    let mut entries = Vec::with_capacity(len);
    let mut std_error = Vec::with_capacity(len);
    for i in 0..len {
        let lambda = curves[0].entries[i].lambda;
        let all = curves.iter().all(|c| c.entries[i].converged);
        let iterations = curves.iter().map(|c| c.entries[i].iterations).sum();
        let chi_w = curves.iter().map(|c| c.entries[i].chi_w).sum::<Complex64>() / k;
        if all {
            let mean_rho = curves.iter().map(|c| c.entries[i].rho).sum::<f64>() / k;
            let var = if curves.len() > 1 {
                curves.iter().map(|c| (c.entries[i].rho - mean_rho).powi(2)).sum::<f64>() / (k - 1.0)
            } else {
                0.0
            };
            entries.push(CurveEntry {
                lambda,
                rho: mean_rho,
                chi_w,
                iterations,
                converged: true,
            });
            std_error.push((var / k).sqrt());
        } else {
            entries.push(CurveEntry::failed(lambda, chi_w, iterations));
            std_error.push(f64::NAN);
        }
    }
    AveragedCurve {
        curve: DensityCurve::new(entries, method, ensemble),
        std_error,
        seeds,
    }
}
