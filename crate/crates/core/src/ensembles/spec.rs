use serde::{Deserialize, Serialize};

use super::HyperparameterLaw;
use crate::error::{Error, Result};

/// Second-moment structure `E[x_{iμ} x_{jν}] = m_{ij} θ_{μν}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case", deny_unknown_fields)]
pub enum Structure {
    /// Independent entries with row variances `s_i` (`Θ = I`).
    RowVariance { law_s: HyperparameterLaw },
    /// Independent entries with column variances `t_μ` (`M = I`).
    ColumnVariance { law_t: HyperparameterLaw },
    /// Kronecker covariance `M = W S Wᵀ`, `Θ = U T Uᵀ`; the flags decide
    /// whether `W`, `U` are Haar rotations or the identity.
    Kronecker {
        law_s: HyperparameterLaw,
        law_t: HyperparameterLaw,
        #[serde(default)]
        rotate_rows: bool,
        #[serde(default)]
        rotate_cols: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    /// Aspect ratio `p / N`.
    pub alpha: f64,
    pub structure: Structure,
}

const UNIT: HyperparameterLaw = HyperparameterLaw::Constant { value: 1.0 };

impl EnsembleSpec {
    pub fn new(alpha: f64, structure: Structure) -> Result<Self> {
        let spec = Self { alpha, structure };
        spec.validate()?;
        Ok(spec)
    }

    pub fn row_variance(alpha: f64, law_s: HyperparameterLaw) -> Result<Self> {
        Self::new(alpha, Structure::RowVariance { law_s })
    }

    pub fn column_variance(alpha: f64, law_t: HyperparameterLaw) -> Result<Self> {
        Self::new(alpha, Structure::ColumnVariance { law_t })
    }

    pub fn kronecker(alpha: f64, law_s: HyperparameterLaw, law_t: HyperparameterLaw) -> Result<Self> {
        Self::new(
            alpha,
            Structure::Kronecker {
                law_s,
                law_t,
                rotate_rows: false,
                rotate_cols: false,
            },
        )
    }

    /// i.i.d. entries of variance `v`.
    pub fn marchenko_pastur(alpha: f64, v: f64) -> Result<Self> {
        Self::row_variance(alpha, HyperparameterLaw::Constant { value: v })
    }

    pub fn with_rotations(mut self, rows: bool, cols: bool) -> Self {
        if let Structure::Kronecker {
            rotate_rows,
            rotate_cols,
            ..
        } = &mut self.structure
        {
            *rotate_rows = rows;
            *rotate_cols = cols;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidInput(format!("alpha must be > 0, got {}", self.alpha)));
        }
        self.law_s().validate()?;
        self.law_t().validate()
    }

    /// Row-variance law; the constant 1 when the structure has none.
    pub fn law_s(&self) -> &HyperparameterLaw {
        match &self.structure {
            Structure::RowVariance { law_s } | Structure::Kronecker { law_s, .. } => law_s,
            Structure::ColumnVariance { .. } => &UNIT,
        }
    }

    /// Column-variance law; the constant 1 when the structure has none.
    pub fn law_t(&self) -> &HyperparameterLaw {
        match &self.structure {
            Structure::ColumnVariance { law_t } | Structure::Kronecker { law_t, .. } => law_t,
            Structure::RowVariance { .. } => &UNIT,
        }
    }

    pub fn rotations(&self) -> (bool, bool) {
        match self.structure {
            Structure::Kronecker {
                rotate_rows,
                rotate_cols,
                ..
            } => (rotate_rows, rotate_cols),
            _ => (false, false),
        }
    }

    /// Mean entry variance `v = <s><t>`.
    pub fn mean_variance(&self) -> f64 {
        self.law_s().mean() * self.law_t().mean()
    }

    /// `∫ λ ρ(λ) dλ = α <s> <t>`.
    pub fn first_moment(&self) -> f64 {
        self.alpha * self.mean_variance()
    }

    /// The same ensemble with its aspect ratio replaced (used to record the
    /// realized `p / N` of a sample).
    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self {
            alpha,
            structure: self.structure.clone(),
        }
    }
}
