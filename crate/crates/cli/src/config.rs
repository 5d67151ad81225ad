//! Run configuration: schema, defaults and validation with key paths.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use wishart_core::ensembles::{EnsembleSpec, HyperparameterLaw, Structure};
use wishart_core::numeric::{LambdaGrid, Method, SolverConfig};

/// A schema or invariant violation, located by its dotted key path.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Replica,
    Bp,
    Exact,
    Mp,
    Trace,
    Moments,
    Compare,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Replica => "replica",
            Command::Bp => "bp",
            Command::Exact => "exact",
            Command::Mp => "mp",
            Command::Trace => "trace",
            Command::Moments => "moments",
            Command::Compare => "compare",
        }
    }

    /// Whether the command samples matrices.
    pub fn samples(&self) -> bool {
        matches!(self, Command::Bp | Command::Exact | Command::Trace | Command::Compare)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(ConfigError::at("output.format", format!("expected csv or json, got `{other}`"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Json => "json",
        })
    }
}

/// Ensemble as written in a config file. `case` may be omitted and is then
/// inferred from which of `law_s`, `law_t` and `v` are present.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case: Option<CaseTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law_s: Option<HyperparameterLaw>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law_t: Option<HyperparameterLaw>,
    /// Entry variance for `marchenko_pastur`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(default)]
    pub rotate_rows: bool,
    #[serde(default)]
    pub rotate_cols: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    RowVariance,
    ColumnVariance,
    Kronecker,
    MarchenkoPastur,
}

impl CaseTag {
    fn as_str(&self) -> &'static str {
        match self {
            Self::RowVariance => "row_variance",
            Self::ColumnVariance => "column_variance",
            Self::Kronecker => "kronecker",
            Self::MarchenkoPastur => "marchenko_pastur",
        }
    }
}

impl EnsembleConfig {
    fn infer_case(&self) -> Result<CaseTag, ConfigError> {
        if let Some(c) = self.case {
            return Ok(c);
        }
        match (&self.law_s, &self.law_t, self.v) {
            (Some(_), Some(_), None) => Ok(CaseTag::Kronecker),
            (Some(_), None, None) => Ok(CaseTag::RowVariance),
            (None, Some(_), None) => Ok(CaseTag::ColumnVariance),
            (None, None, Some(_)) => Ok(CaseTag::MarchenkoPastur),
            _ => Err(ConfigError::at(
                "ensemble.case",
                "cannot infer the case; give `case` or exactly one of law_s, law_t, both laws, or v",
            )),
        }
    }

    pub fn to_spec(&self) -> Result<EnsembleSpec, ConfigError> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(ConfigError::at(
                "ensemble.alpha",
                format!("must be a finite number > 0, got {}", self.alpha),
            ));
        }
        let case = self.infer_case()?;
        let need = |law: &Option<HyperparameterLaw>, key: &str| -> Result<HyperparameterLaw, ConfigError> {
            let law = law
                .clone()
                .ok_or_else(|| ConfigError::at(format!("ensemble.{key}"), format!("required for case {}", case.as_str())))?;
            law.validate()
                .map_err(|e| ConfigError::at(format!("ensemble.{key}"), e.to_string()))?;
            Ok(law)
        };
        let forbid = |present: bool, key: &str| -> Result<(), ConfigError> {
            if present {
                Err(ConfigError::at(
                    format!("ensemble.{key}"),
                    format!("not used by case {}", case.as_str()),
                ))
            } else {
                Ok(())
            }
        };
        if case != CaseTag::Kronecker {
            forbid(self.rotate_rows, "rotate_rows")?;
            forbid(self.rotate_cols, "rotate_cols")?;
        }
        let structure = match case {
            CaseTag::RowVariance => {
                forbid(self.law_t.is_some(), "law_t")?;
                forbid(self.v.is_some(), "v")?;
                Structure::RowVariance {
                    law_s: need(&self.law_s, "law_s")?,
                }
            }
            CaseTag::ColumnVariance => {
                forbid(self.law_s.is_some(), "law_s")?;
                forbid(self.v.is_some(), "v")?;
                Structure::ColumnVariance {
                    law_t: need(&self.law_t, "law_t")?,
                }
            }
            CaseTag::Kronecker => {
                forbid(self.v.is_some(), "v")?;
                Structure::Kronecker {
                    law_s: need(&self.law_s, "law_s")?,
                    law_t: need(&self.law_t, "law_t")?,
                    rotate_rows: self.rotate_rows,
                    rotate_cols: self.rotate_cols,
                }
            }
            CaseTag::MarchenkoPastur => {
                forbid(self.law_s.is_some(), "law_s")?;
                forbid(self.law_t.is_some(), "law_t")?;
                let v = self
                    .v
                    .ok_or_else(|| ConfigError::at("ensemble.v", "required for case marchenko_pastur"))?;
                if !(v > 0.0) || !v.is_finite() {
                    return Err(ConfigError::at("ensemble.v", format!("must be a finite number > 0, got {v}")));
                }
                Structure::RowVariance {
                    law_s: HyperparameterLaw::Constant { value: v },
                }
            }
        };
        EnsembleSpec::new(self.alpha, structure).map_err(|e| ConfigError::at("ensemble", e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub lambda_min: f64,
    /// Defaults to `1.2 (1 + √α)² s_max t_max`, above every support edge.
    pub lambda_max: Option<f64>,
    pub n_points: usize,
    pub epsilon: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            lambda_min: 0.0,
            lambda_max: None,
            n_points: 1000,
            epsilon: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub n_samples: usize,
    pub base_seed: u64,
    /// Histogram bins for `exact`, spread uniformly over the grid's range.
    pub bins: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            n: 500,
            n_samples: 100,
            base_seed: 0,
            bins: 100,
        }
    }
}

impl SamplingConfig {
    /// Sample `i` uses seed `base_seed + i`.
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.n_samples as u64).map(|i| self.base_seed.wrapping_add(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Standard output when absent.
    pub path: Option<String>,
    pub format: OutputFormat,
}

/// Engines run by `compare`, in report order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareConfig {
    pub methods: Vec<Method>,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            methods: vec![Method::Replica, Method::Exact, Method::Bp],
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub compare: CompareConfig,
    /// Largest tolerated fraction of non-converged grid points before the run
    /// is reported as a numerical failure.
    #[serde(default = "default_failure_fraction")]
    pub max_failure_fraction: f64,
}

fn default_failure_fraction() -> f64 {
    0.01
}

/// Document syntax of a config.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocFormat {
    Toml,
    Json,
}

impl DocFormat {
    /// `.json` files are JSON, everything else is TOML.
    pub fn from_path(path: &str) -> Self {
        if path.to_ascii_lowercase().ends_with(".json") {
            Self::Json
        } else {
            Self::Toml
        }
    }
}

/// Parses and validates a config document. Unknown keys are rejected and every
/// error carries the dotted path of the offending key.
pub fn parse_config(document: &str, format: DocFormat) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = match format {
        DocFormat::Json => {
            let mut de = serde_json::Deserializer::from_str(document);
            serde_path_to_error::deserialize(&mut de).map_err(|e| located(e.path().to_string(), e.inner()))?
        }
        DocFormat::Toml => {
            let de = toml::de::Deserializer::parse(document).map_err(|e| ConfigError::at("<document>", toml_message(&e, document)))?;
            serde_path_to_error::deserialize(de).map_err(|e| located(e.path().to_string(), &toml_message(e.inner(), document)))?
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

fn located(path: String, inner: &dyn fmt::Display) -> ConfigError {
    let path = if path.is_empty() || path == "." { "<document>".to_string() } else { path };
    ConfigError::at(path, inner.to_string().trim().to_string())
}

/// The error's own message, with the 1-based line when a span is known.
fn toml_message(e: &toml::de::Error, document: &str) -> String {
    let msg = e.message().trim().to_string();
    match e.span() {
        Some(span) => {
            let upto = document.get(..span.start).unwrap_or(document);
            format!("{msg} (line {})", upto.matches('\n').count() + 1)
        }
        None => msg,
    }
}

impl RunConfig {
    /// Config with only an ensemble; everything else at its default.
    pub fn with_ensemble(ensemble: EnsembleConfig) -> Self {
        Self {
            command: None,
            ensemble,
            grid: GridConfig::default(),
            sampling: SamplingConfig::default(),
            solver: SolverConfig::default(),
            output: OutputConfig::default(),
            compare: CompareConfig::default(),
            max_failure_fraction: default_failure_fraction(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let spec = self.ensemble.to_spec()?;
        let g = &self.grid;
        if !g.lambda_min.is_finite() {
            return Err(ConfigError::at("grid.lambda_min", "must be finite"));
        }
        let lambda_max = self.lambda_max_for(&spec)?;
        if !(g.lambda_min < lambda_max) {
            return Err(ConfigError::at(
                "grid.lambda_max",
                format!("must exceed grid.lambda_min = {}, got {lambda_max}", g.lambda_min),
            ));
        }
        if g.n_points < 2 {
            return Err(ConfigError::at("grid.n_points", format!("must be >= 2, got {}", g.n_points)));
        }
        if !(g.epsilon > 0.0) || !g.epsilon.is_finite() {
            return Err(ConfigError::at("grid.epsilon", format!("must be > 0, got {}", g.epsilon)));
        }
        if self.command.is_some_and(|c| c.samples()) {
            if self.sampling.n < 2 {
                return Err(ConfigError::at("sampling.N", format!("must be >= 2, got {}", self.sampling.n)));
            }
            if self.sampling.n_samples < 1 {
                return Err(ConfigError::at("sampling.n_samples", "must be >= 1"));
            }
        }
        if self.command == Some(Command::Compare) && self.compare.methods.len() < 2 {
            return Err(ConfigError::at("compare.methods", "needs at least two methods"));
        }
        if self.sampling.bins < 1 {
            return Err(ConfigError::at("sampling.bins", "must be >= 1"));
        }
        self.solver
            .validate()
            .map_err(|e| ConfigError::at("solver", e.to_string()))?;
        if !(0.0..=1.0).contains(&self.max_failure_fraction) {
            return Err(ConfigError::at(
                "max_failure_fraction",
                format!("must lie in [0, 1], got {}", self.max_failure_fraction),
            ));
        }
        Ok(())
    }

    fn lambda_max_for(&self, spec: &EnsembleSpec) -> Result<f64, ConfigError> {
        match self.grid.lambda_max {
            Some(x) if x.is_finite() => Ok(x),
            Some(x) => Err(ConfigError::at("grid.lambda_max", format!("must be finite, got {x}"))),
            None => {
                let bound = (1.0 + spec.alpha.sqrt()).powi(2) * spec.law_s().support_max() * spec.law_t().support_max();
                if bound > 0.0 && bound.is_finite() {
                    Ok(1.2 * bound)
                } else {
                    Err(ConfigError::at("grid.lambda_max", "no default for a spectrum bounded by 0; set it"))
                }
            }
        }
    }

    /// Resolves every defaulted value so the echoed config is explicit.
    pub fn resolved(mut self) -> Result<Self, ConfigError> {
        self.validate()?;
        let spec = self.ensemble.to_spec()?;
        self.grid.lambda_max = Some(self.lambda_max_for(&spec)?);
        Ok(self)
    }

    pub fn spec(&self) -> Result<EnsembleSpec, ConfigError> {
        self.ensemble.to_spec()
    }

    pub fn lambda_grid(&self) -> Result<LambdaGrid, ConfigError> {
        let spec = self.spec()?;
        let hi = self.lambda_max_for(&spec)?;
        LambdaGrid::linspace(self.grid.lambda_min, hi, self.grid.n_points, self.grid.epsilon)
            .map_err(|e| ConfigError::at("grid", e.to_string()))
    }

    /// Histogram edges for `exact`: `sampling.bins` uniform bins over the grid range.
    pub fn bin_edges(&self) -> Result<Vec<f64>, ConfigError> {
        let spec = self.spec()?;
        let hi = self.lambda_max_for(&spec)?;
        wishart_core::baseline::uniform_bin_edges(self.grid.lambda_min, hi, self.sampling.bins)
            .map_err(|e| ConfigError::at("sampling.bins", e.to_string()))
    }
}

/// Parses a `min:max:n` grid flag.
pub fn parse_grid_flag(s: &str) -> Result<(f64, f64, usize), ConfigError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || ConfigError::at("--grid", format!("expected min:max:n, got `{s}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let min = parts[0].trim().parse::<f64>().map_err(|_| bad())?;
    let max = parts[1].trim().parse::<f64>().map_err(|_| bad())?;
    let n = parts[2].trim().parse::<usize>().map_err(|_| bad())?;
    Ok((min, max, n))
}
