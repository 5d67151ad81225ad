//! Exact finite-size references: a dense symmetric eigensolver, empirical
//! histograms of sampled spectra and the trace-form resolvent of explicit
//! covariance matrices.

mod eigen;
mod histogram;
mod trace_form;

pub use eigen::{
    gershgorin_bounds, householder_tridiagonalize, sturm_bisection_eigenvalues, sturm_count, symmetric_eigenvalues,
    Tridiagonal, DEFAULT_BISECTION_TOLERANCE, SYMMETRY_TOLERANCE,
};
pub use histogram::{
    default_bin_edges, empirical_density, exact_spectra, histogram_from_spectra, spectral_average,
    spectral_resolvent_curve, uniform_bin_edges, Histogram, DEFAULT_BINS,
};
pub use trace_form::{diagonal_matrix, trace_form_resolvent};
