//! Stochastic optimization under performative distribution shift.
//!
//! The crate provides distribution maps ([`environments`]), greedy and lazy
//! deploy SGD plus population-level baselines ([`optimizers`]), theoretical
//! bounds and sensitivity checks ([`analysis`]), credit-data ingestion
//! ([`data`]) and config-driven experiment runs ([`experiment`]).

// `!(x > 0.0)` is used throughout so that NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod data;
pub mod environments;
pub mod error;
pub mod experiment;
pub mod loss;
pub mod optimizers;
pub mod params;
pub mod problem;
pub mod rng;
pub mod trajectory;

pub use error::{Error, Result};
pub use loss::Loss;
pub use params::{project, BoxBounds, ParamVector};
pub use problem::{
    closed_form_stable_point, performative_risk, population_gradient, Capabilities, Environment,
    ProblemConstants, Sample,
};
pub use rng::SimRng;
pub use trajectory::{RecordPolicy, RunStatus, Trajectory, TrajectoryRecord};
