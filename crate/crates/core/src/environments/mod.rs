//! Concrete ε-sensitive distribution maps.

mod eta;
mod gaussian;
mod point_mass;
mod strategic;

pub use eta::EtaEnv;
pub use gaussian::GaussianEnv;
pub use point_mass::PointMassEnv;
pub use strategic::{best_response, compute_logistic_constants, StrategicEnv, DEFAULT_STRATEGIC_DIMS};
