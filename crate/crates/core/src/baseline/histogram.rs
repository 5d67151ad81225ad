//! Empirical spectra of sampled Wishart matrices and their seed-averaged histograms.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eigen::{symmetric_eigenvalues, DEFAULT_BISECTION_TOLERANCE};
use crate::ensembles::{sample_matrix, EnsembleSpec};
use crate::error::{Error, Result};
use crate::numeric::{CurveEntry, DensityCurve, LambdaGrid, Method};

/// Number of bins used by [`default_bin_edges`].
pub const DEFAULT_BINS: usize = 100;

/// Seed-averaged eigenvalue histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    /// Mean fraction of eigenvalues per bin.
    pub mass: Vec<f64>,
    /// Standard error of `mass` across samples (zero for a single sample).
    pub std_error: Vec<f64>,
    pub n_samples: usize,
    pub n_matrix: usize,
}

impl Histogram {
    /// Bin centers with density `mass / width`. The resolvent is not defined
    /// for a histogram, so `chi_w` is left as `NaN`.
    pub fn to_curve(&self, ensemble: Option<EnsembleSpec>) -> DensityCurve {
        let entries = self
            .bin_edges
            .windows(2)
            .zip(&self.mass)
            .map(|(w, &m)| CurveEntry {
                lambda: 0.5 * (w[0] + w[1]),
                rho: m / (w[1] - w[0]),
                chi_w: Complex64::new(f64::NAN, f64::NAN),
                iterations: 0,
                converged: true,
            })
            .collect();
        DensityCurve::new(entries, Method::Exact, ensemble)
    }

    /// Standard errors of the density `mass / width`, aligned with [`Histogram::to_curve`].
    pub fn density_std_error(&self) -> Vec<f64> {
        self.bin_edges
            .windows(2)
            .zip(&self.std_error)
            .map(|(w, &e)| e / (w[1] - w[0]))
            .collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }
}

/// `n_bins` uniform bins over `[0, 1.2 λ_bound]`, where `λ_bound = (1 + √α)² s_max t_max`
/// bounds the upper support edge from above.
pub fn default_bin_edges(spec: &EnsembleSpec, n_bins: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    let bound = (1.0 + spec.alpha.sqrt()).powi(2) * spec.law_s().support_max() * spec.law_t().support_max();
    if !(bound > 0.0) || !bound.is_finite() {
        return Err(Error::InvalidInput(format!(
            "cannot bin a spectrum whose upper bound is {bound}"
        )));
    }
    uniform_bin_edges(0.0, 1.2 * bound, n_bins)
}

/// `n_bins + 1` equally spaced edges, computed as `lo + (hi - lo) i / n_bins`.
pub fn uniform_bin_edges(lo: f64, hi: f64, n_bins: usize) -> Result<Vec<f64>> {
    if n_bins == 0 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidInput(format!(
            "need lo < hi and at least one bin, got [{lo}, {hi}] with {n_bins} bins"
        )));
    }
    Ok((0..=n_bins)
        .map(|i| lo + (hi - lo) * i as f64 / n_bins as f64)
        .collect())
}

/// Sorted eigenvalues of `X Xᵀ` for one sample per seed, computed concurrently.
pub fn exact_spectra(spec: &EnsembleSpec, n: usize, seeds: &[u64]) -> Result<Vec<Vec<f64>>> {
    seeds
        .par_iter()
        .map(|&seed| {
            let sample = sample_matrix(spec, n, seed)?;
            symmetric_eigenvalues(&sample.wishart(), DEFAULT_BISECTION_TOLERANCE)
        })
        .collect()
}

/// Bins every spectrum separately, then reports the mean and standard error per bin.
///
/// An eigenvalue equal to the last edge falls into the last bin; values outside
/// `[first, last]` are not counted, so the total mass may fall short of 1.
pub fn histogram_from_spectra(spectra: &[Vec<f64>], bin_edges: &[f64]) -> Result<Histogram> {
    if spectra.is_empty() {
        return Err(Error::InvalidInput("need at least one spectrum".into()));
    }
    if bin_edges.len() < 2 || bin_edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("bin edges must be strictly increasing with at least two edges".into()));
    }
    let n_matrix = spectra[0].len();
    if n_matrix == 0 || spectra.iter().any(|s| s.len() != n_matrix) {
        return Err(Error::InvalidInput("spectra must be non-empty and of equal size".into()));
    }
    let bins = bin_edges.len() - 1;
    let (first, last) = (bin_edges[0], bin_edges[bins]);
    let per_sample: Vec<Vec<f64>> = spectra
        .iter()
        .map(|eigs| {
            let mut counts = vec![0.0; bins];
            for &x in eigs {
                if x < first || x > last || x.is_nan() {
                    continue;
                }
                let i = bin_edges.partition_point(|&e| e <= x).saturating_sub(1).min(bins - 1);
                counts[i] += 1.0;
            }
            counts.iter().map(|c| c / n_matrix as f64).collect()
        })
        .collect();

    let k = spectra.len() as f64;
    let mut mass = vec![0.0; bins];
    let mut std_error = vec![0.0; bins];
    for b in 0..bins {
        let mean = per_sample.iter().map(|h| h[b]).sum::<f64>() / k;
        mass[b] = mean;
        if spectra.len() > 1 {
            let var = per_sample.iter().map(|h| (h[b] - mean).powi(2)).sum::<f64>() / (k - 1.0);
            std_error[b] = (var / k).sqrt();
        }
    }
    Ok(Histogram {
        bin_edges: bin_edges.to_vec(),
        mass,
        std_error,
        n_samples: spectra.len(),
        n_matrix,
    })
}

/// Samples, diagonalizes and bins one matrix per seed.
pub fn empirical_density(spec: &EnsembleSpec, n: usize, seeds: &[u64], bin_edges: &[f64]) -> Result<Histogram> {
    if seeds.is_empty() {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    histogram_from_spectra(&exact_spectra(spec, n, seeds)?, bin_edges)
}

/// Seed-averaged finite-size resolvent `(1/N) Σ_k 1/(z - λ_k)` on `grid`, with
/// `ρ = -Im χ_w / π` (a Lorentzian-smoothed empirical density).
pub fn spectral_resolvent_curve(spectra: &[Vec<f64>], grid: &LambdaGrid) -> Result<DensityCurve> {
    if spectra.is_empty() || spectra.iter().any(|s| s.is_empty()) {
        return Err(Error::InvalidInput("need at least one non-empty spectrum".into()));
    }
    let k = spectra.len() as f64;
    let entries = grid
        .points()
        .iter()
        .map(|pt| {
            let z = pt.z();
            let chi_w = spectra
                .iter()
                .map(|eigs| eigs.iter().map(|&l| 1.0 / (z - l)).sum::<Complex64>() / eigs.len() as f64)
                .sum::<Complex64>()
                / k;
            CurveEntry {
                lambda: pt.lambda,
                rho: (-chi_w.im / std::f64::consts::PI).max(0.0),
                chi_w,
                iterations: 0,
                converged: true,
            }
        })
        .collect();
    Ok(DensityCurve::new(entries, Method::Exact, None))
}

/// Mean and standard error across samples of `(1/N) Σ_k f(λ_k)`.
pub fn spectral_average<F>(spectra: &[Vec<f64>], f: F) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    if spectra.is_empty() || spectra.iter().any(|s| s.is_empty()) {
        return Err(Error::InvalidInput("need at least one non-empty spectrum".into()));
    }
    let vals: Vec<f64> = spectra
        .iter()
        .map(|e| e.iter().map(|&l| f(l)).sum::<f64>() / e.len() as f64)
        .collect();
    let k = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / k;
    let se = if vals.len() > 1 {
        (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt()
    } else {
        0.0
    };
    Ok((mean, se))
}
