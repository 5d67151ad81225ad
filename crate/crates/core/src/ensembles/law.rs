//! Hyperparameter laws and the averaging bracket `<f>` over them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default Gauss–Legendre node count for uniform laws.
pub const DEFAULT_QUADRATURE_NODES: usize = 128;

/// Distribution of a row variance `s` or column variance `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HyperparameterLaw {
    Uniform { min: f64, max: f64 },
    Constant { value: f64 },
    Discrete { values: Vec<f64> },
}

impl HyperparameterLaw {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Self::Uniform { min, max } => min.is_finite() && max.is_finite() && *min >= 0.0 && min < max,
            Self::Constant { value } => value.is_finite() && *value >= 0.0,
            Self::Discrete { values } => {
                !values.is_empty() && values.iter().all(|v| v.is_finite() && *v >= 0.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidLaw(format!("{self:?}")))
        }
    }

    /// Smallest value in the support.
    pub fn support_min(&self) -> f64 {
        match self {
            Self::Uniform { min, .. } => *min,
            Self::Constant { value } => *value,
            Self::Discrete { values } => values.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    /// Largest value in the support.
    pub fn support_max(&self) -> f64 {
        match self {
            Self::Uniform { max, .. } => *max,
            Self::Constant { value } => *value,
            Self::Discrete { values } => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Exact mean of the law.
    pub fn mean(&self) -> f64 {
        match self {
            Self::Uniform { min, max } => 0.5 * (min + max),
            Self::Constant { value } => *value,
            Self::Discrete { values } => values.iter().sum::<f64>() / values.len() as f64,
        }
    }

    /// Returns the law with every value multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        match self {
            Self::Uniform { min, max } => Self::Uniform { min: c * min, max: c * max },
            Self::Constant { value } => Self::Constant { value: c * value },
            Self::Discrete { values } => Self::Discrete {
                values: values.iter().map(|v| c * v).collect(),
            },
        }
    }

    pub fn quadrature(&self, nodes: usize) -> Result<LawQuadrature> {
        self.validate()?;
        Ok(match self {
            Self::Constant { value } => LawQuadrature {
                nodes: vec![*value],
                weights: vec![1.0],
            },
            Self::Discrete { values } => LawQuadrature {
                nodes: values.clone(),
                weights: vec![1.0 / values.len() as f64; values.len()],
            },
            Self::Uniform { min, max } => {
                if nodes == 0 {
                    return Err(Error::InvalidInput("quadrature needs at least one node".into()));
                }
                let (x, w) = gauss_legendre(nodes);
                let mid = 0.5 * (min + max);
                let half = 0.5 * (max - min);
                LawQuadrature {
                    nodes: x.iter().map(|xi| mid + half * xi).collect(),
                    weights: w.iter().map(|wi| 0.5 * wi).collect(),
                }
            }
        })
    }
}

/// Nodes and probability weights (summing to one) representing a law.
#[derive(Debug, Clone, PartialEq)]
pub struct LawQuadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LawQuadrature {
    /// `Σ w_i f(x_i)`; fails on the first node where `f` is not finite.
    pub fn expect<F>(&self, mut f: F) -> Result<Complex64>
    where
        F: FnMut(f64) -> Complex64,
    {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(x);
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::Evaluation { node: x });
            }
            acc += v * w;
        }
        Ok(acc)
    }

    pub fn expect_real<F>(&self, mut f: F) -> Result<f64>
    where
        F: FnMut(f64) -> f64,
    {
        self.expect(|x| Complex64::new(f(x), 0.0)).map(|c| c.re)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `<f>` over `law`, with uniform laws integrated by 128-node Gauss–Legendre.
pub fn expect_law<F>(law: &HyperparameterLaw, f: F) -> Result<Complex64>
where
    F: FnMut(f64) -> Complex64,
{
    expect_law_with_nodes(law, f, DEFAULT_QUADRATURE_NODES)
}

pub fn expect_law_with_nodes<F>(law: &HyperparameterLaw, f: F, nodes: usize) -> Result<Complex64>
where
    F: FnMut(f64) -> Complex64,
{
    law.quadrature(nodes)?.expect(f)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th largest root.
        let mut r = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, r);
            dp = d;
            let dr = p / d;
            r -= dr;
            if dr.abs() <= 1e-16 * r.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, r);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - r * r) * dp * dp);
        x[n - 1 - i] = r;
        x[i] = -r;
        w[n - 1 - i] = wi;
        w[i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
