//! Hyperparameter laws, ensemble descriptions and Gaussian sampling.

mod law;
mod sample;
mod spec;

pub use law::{
    expect_law, expect_law_with_nodes, gauss_legendre, HyperparameterLaw, LawQuadrature,
    DEFAULT_QUADRATURE_NODES,
};
pub use sample::{
    build_covariance_factors, column_count, haar_orthogonal, sample_matrix, seeded_rng,
    CovarianceFactor, CovarianceFactors, SampledEnsemble,
};
pub use spec::{EnsembleSpec, Structure};
