//! Shared numeric substrate: spectral points and grids, density curves, the
//! damped fixed-point driver and trapezoid integration.

mod curve;
mod grid;
mod integrate;
mod solver;

pub use curve::{CurveEntry, DensityCurve, Method};
pub use grid::{LambdaGrid, SpectralPoint};
pub use integrate::{richardson_extrapolate, trapezoid_integrate};
pub use solver::{damped_fixed_point, damped_fixed_point_scalar, FixedPoint, SolverConfig};

/// Densities in `(-NEGATIVE_TOLERANCE, 0)` are treated as roundoff and clamped to 0.
pub const NEGATIVE_TOLERANCE: f64 = 1e-8;
