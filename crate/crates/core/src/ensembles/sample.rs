//! Covariance factors and seeded Gaussian sampling of `X ∈ R^{N×p}` with
//! `E[N x_{iμ} x_{jν}] = m_{ij} θ_{μν}`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{EnsembleSpec, HyperparameterLaw};
use crate::error::{Error, Result};

/// A symmetric PSD covariance factor, kept in factored form when it is diagonal.
#[derive(Debug, Clone, PartialEq)]
pub enum CovarianceFactor {
    Diagonal(Vec<f64>),
    /// `basis · diag(eigenvalues) · basisᵀ` with orthogonal `basis`.
    Rotated {
        eigenvalues: Vec<f64>,
        basis: DMatrix<f64>,
    },
}

impl CovarianceFactor {
    pub fn dim(&self) -> usize {
        match self {
            Self::Diagonal(d) => d.len(),
            Self::Rotated { eigenvalues, .. } => eigenvalues.len(),
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        match self {
            Self::Diagonal(d) => d,
            Self::Rotated { eigenvalues, .. } => eigenvalues,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, Self::Diagonal(_))
    }

    pub fn dense(&self) -> DMatrix<f64> {
        self.spectral_function(|x| x)
    }

    /// Principal square root `basis · diag(√eigenvalues) · basisᵀ`.
    pub fn sqrt_dense(&self) -> DMatrix<f64> {
        self.spectral_function(f64::sqrt)
    }

    /// Diagonal entries (`m_kk`, `θ_μμ`).
    pub fn diagonal(&self) -> Vec<f64> {
        match self {
            Self::Diagonal(d) => d.clone(),
            Self::Rotated { eigenvalues, basis } => (0..basis.nrows())
                .map(|i| {
                    basis
                        .row(i)
                        .iter()
                        .zip(eigenvalues)
                        .map(|(b, e)| b * b * e)
                        .sum()
                })
                .collect(),
        }
    }

    fn spectral_function(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        match self {
            Self::Diagonal(d) => {
                DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d.len(), d.iter().map(|&x| f(x))))
            }
            Self::Rotated { eigenvalues, basis } => {
                let mut scaled = basis.clone();
                for (j, &e) in eigenvalues.iter().enumerate() {
                    scaled.column_mut(j).scale_mut(f(e));
                }
                let out = &scaled * basis.transpose();
                // Symmetrize away roundoff.
                (&out + out.transpose()) * 0.5
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceFactors {
    pub m: CovarianceFactor,
    pub theta: CovarianceFactor,
    pub s_draws: Vec<f64>,
    pub t_draws: Vec<f64>,
}

/// One realized matrix `X` (entries already divided by `√N`, so `X Xᵀ` is the
/// Wishart matrix) together with the factors it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledEnsemble {
    pub n_rows: usize,
    pub n_cols: usize,
    pub matrix: DMatrix<f64>,
    pub m: CovarianceFactor,
    pub theta: CovarianceFactor,
    pub seed: u64,
    pub spec: EnsembleSpec,
}

impl SampledEnsemble {
    /// Realized `p / N`.
    pub fn realized_alpha(&self) -> f64 {
        self.n_cols as f64 / self.n_rows as f64
    }

    /// `X Xᵀ`.
    pub fn wishart(&self) -> DMatrix<f64> {
        let w = &self.matrix * self.matrix.transpose();
        (&w + w.transpose()) * 0.5
    }
}

/// Number of columns for `N` rows: `round(α N)`.
pub fn column_count(alpha: f64, n: usize) -> Result<usize> {
    let p = (alpha * n as f64).round();
    if !(p >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "alpha * N = {} rounds to no columns",
            alpha * n as f64
        )));
    }
    Ok(p as usize)
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn build_covariance_factors(spec: &EnsembleSpec, n: usize, seed: u64) -> Result<CovarianceFactors> {
    let mut rng = seeded_rng(seed);
    build_factors_with(spec, n, &mut rng)
}

pub fn sample_matrix(spec: &EnsembleSpec, n: usize, seed: u64) -> Result<SampledEnsemble> {
    let mut rng = seeded_rng(seed);
    let factors = build_factors_with(spec, n, &mut rng)?;
    for (name, draws) in [("s", &factors.s_draws), ("t", &factors.t_draws)] {
        if let Some(v) = draws.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::InvalidLaw(format!("negative {name} draw {v}")));
        }
    }
    let p = factors.t_draws.len();
    let g = DMatrix::<f64>::from_fn(n, p, |_, _| rng.sample(StandardNormal));
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();

    let matrix = match (&factors.m, &factors.theta) {
        (CovarianceFactor::Diagonal(s), CovarianceFactor::Diagonal(t)) => {
            let rs: Vec<f64> = s.iter().map(|v| v.sqrt() * inv_sqrt_n).collect();
            let ct: Vec<f64> = t.iter().map(|v| v.sqrt()).collect();
            DMatrix::from_fn(n, p, |i, j| rs[i] * g[(i, j)] * ct[j])
        }
        (m, theta) => {
            let left = match m {
                CovarianceFactor::Diagonal(s) => {
                    let mut x = g;
                    for (i, v) in s.iter().enumerate() {
                        x.row_mut(i).scale_mut(v.sqrt());
                    }
                    x
                }
                rotated => rotated.sqrt_dense() * g,
            };
            let mut x = match theta {
                CovarianceFactor::Diagonal(t) => {
                    let mut x = left;
                    for (j, v) in t.iter().enumerate() {
                        x.column_mut(j).scale_mut(v.sqrt());
                    }
                    x
                }
                rotated => left * rotated.sqrt_dense(),
            };
            x.scale_mut(inv_sqrt_n);
            x
        }
    };

    Ok(SampledEnsemble {
        n_rows: n,
        n_cols: p,
        matrix,
        m: factors.m,
        theta: factors.theta,
        seed,
        spec: spec.clone(),
    })
}

fn build_factors_with(spec: &EnsembleSpec, n: usize, rng: &mut ChaCha8Rng) -> Result<CovarianceFactors> {
    spec.validate()?;
    if n < 2 {
        return Err(Error::InvalidInput(format!("N must be >= 2, got {n}")));
    }
    let p = column_count(spec.alpha, n)?;
    let s_draws = draw_law(spec.law_s(), n, rng);
    let t_draws = draw_law(spec.law_t(), p, rng);
    let (rotate_rows, rotate_cols) = spec.rotations();
    let m = factor(s_draws.clone(), rotate_rows, rng);
    let theta = factor(t_draws.clone(), rotate_cols, rng);
    Ok(CovarianceFactors {
        m,
        theta,
        s_draws,
        t_draws,
    })
}

fn factor(draws: Vec<f64>, rotate: bool, rng: &mut ChaCha8Rng) -> CovarianceFactor {
    if rotate {
        let basis = haar_orthogonal(draws.len(), rng);
        CovarianceFactor::Rotated {
            eigenvalues: draws,
            basis,
        }
    } else {
        CovarianceFactor::Diagonal(draws)
    }
}

fn draw_law<R: Rng>(law: &HyperparameterLaw, count: usize, rng: &mut R) -> Vec<f64> {
    match law {
        HyperparameterLaw::Constant { value } => vec![*value; count],
        HyperparameterLaw::Uniform { min, max } => (0..count).map(|_| rng.random_range(*min..*max)).collect(),
        HyperparameterLaw::Discrete { values } => (0..count)
            .map(|_| values[rng.random_range(0..values.len())])
            .collect(),
    }
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the signs
/// of `R`'s diagonal folded into `Q`.
pub fn haar_orthogonal<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}
