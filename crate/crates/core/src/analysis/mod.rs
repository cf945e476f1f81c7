//! Theoretical bounds, Wasserstein sensitivity checks and run statistics.

mod audit;
mod band;
mod bounds;
mod wasserstein;

pub use audit::{sensitivity_audit, AuditOptions, AuditRow};
pub use band::{confidence_band, Band, Z_90};
pub use bounds::{
    greedy_bound, greedy_constant, greedy_recursion_rhs, lazy_constant, lazy_contraction_constant,
    offline_recursion_rhs, BoundParams,
};
pub use wasserstein::{bootstrap_w1_se, empirical_w1_1d, sorted};
