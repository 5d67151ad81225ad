//! Asymptotic eigenvalue densities of Wishart matrices `X Xᵀ` whose entries
//! are independent but not identically distributed, or Kronecker-correlated.
//!
//! Three engines cross-check each other:
//!
//! * [`replica`]: deterministic saddle-point fixed points, evaluated on the
//!   hyperparameter laws directly;
//! * [`bp`]: belief propagation on one sampled matrix, `O(N p)` per sweep;
//! * [`baseline`]: Householder tridiagonalization plus Sturm bisection, and the
//!   trace-form resolvent recursion on explicit covariance matrices.
//!
//! All resolvents are evaluated at `λ + iε` with `ε > 0`, and densities are
//! `ρ(λ) = -Im χ_w / π`.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod baseline;
pub mod bp;
pub mod ensembles;
pub mod error;
pub mod numeric;
pub mod replica;

pub use error::{Error, Result};
