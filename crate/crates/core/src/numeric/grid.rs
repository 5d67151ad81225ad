use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An abscissa `lambda` paired with the resolvent regularizer `epsilon`.
///
/// The resolvent is always evaluated at `lambda + i*epsilon` (retarded branch),
/// so densities come out as `-Im(chi_w) / pi >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub lambda: f64,
    pub epsilon: f64,
}

impl SpectralPoint {
    pub fn new(lambda: f64, epsilon: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::InvalidInput(format!("lambda must be finite, got {lambda}")));
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidInput(format!(
                "epsilon must be finite and > 0, got {epsilon}"
            )));
        }
        Ok(Self { lambda, epsilon })
    }

    /// `lambda + i*epsilon`.
    #[inline]
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.lambda, self.epsilon)
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.lambda, epsilon)
    }
}

/// Strictly increasing set of spectral points.
///
/// `descending_sweep` asks solvers that warm-start to walk the grid from the
/// largest `lambda` downwards, starting on the large-`lambda` asymptote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    points: Vec<SpectralPoint>,
    pub descending_sweep: bool,
}

impl LambdaGrid {
    pub fn new(points: Vec<SpectralPoint>, descending_sweep: bool) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("grid has no points".into()));
        }
        for w in points.windows(2) {
            if !(w[1].lambda > w[0].lambda) {
                return Err(Error::InvalidInput(format!(
                    "grid lambdas must be strictly increasing ({} then {})",
                    w[0].lambda, w[1].lambda
                )));
            }
        }
        Ok(Self {
            points,
            descending_sweep,
        })
    }

    /// `n` evenly spaced points on `[min, max]` sharing one `epsilon`.
    pub fn linspace(min: f64, max: f64, n: usize, epsilon: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("grid needs at least one point".into()));
        }
        if n == 1 {
            return Self::new(vec![SpectralPoint::new(min, epsilon)?], true);
        }
        if !(max > min) {
            return Err(Error::InvalidInput(format!(
                "lambda_min {min} must be below lambda_max {max}"
            )));
        }
        let step = (max - min) / (n - 1) as f64;
        let points = (0..n)
            .map(|i| {
                let lambda = if i == n - 1 { max } else { min + step * i as f64 };
                SpectralPoint::new(lambda, epsilon)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(points, true)
    }

    pub fn from_lambdas(lambdas: &[f64], epsilon: f64) -> Result<Self> {
        let points = lambdas
            .iter()
            .map(|&l| SpectralPoint::new(l, epsilon))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points, true)
    }

    pub fn points(&self) -> &[SpectralPoint] {
        &self.points
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.lambda).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices in the order a warm-started sweep visits them.
    pub fn sweep_order(&self) -> Vec<usize> {
        if self.descending_sweep {
            (0..self.points.len()).rev().collect()
        } else {
            (0..self.points.len()).collect()
        }
    }

    /// Same abscissae with every epsilon replaced.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        let points = self
            .points
            .iter()
            .map(|p| p.with_epsilon(epsilon))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points, self.descending_sweep)
    }
}
