//! Support-edge estimation and cross-method comparison of density curves.

mod compare;
mod edges;

pub use compare::{compare, CompareReport, CurveSummary, MomentCheck, PairDistance};
pub use edges::{estimate_support_edges, SupportEdges, DEFAULT_EDGE_THRESHOLD, MIN_EDGE_POINTS};
