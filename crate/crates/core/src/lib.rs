//! Constrained attitude slewing for a reaction-wheel spacecraft: potential-field guidance,
//! boundary-layer sliding-mode tracking, multi-rate closed-loop simulation and Monte Carlo
//! campaigns.
//!
//! The algebra, plant, actuator, guidance and control layers are generic over the scalar
//! type; simulation and campaigns run in `f64`.

pub mod apf;
pub mod campaign;
pub mod error;
pub mod math;
pub mod rigid_body;
pub mod rw_cluster;
pub mod scalar;
pub mod sim;
pub mod smc;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Vec3f = math::Vec3<f32>;
pub type Vec3d = math::Vec3<f64>;
pub type Mat3f = math::Mat3<f32>;
pub type Mat3d = math::Mat3<f64>;
pub type Quatf = math::Quaternion<f32>;
pub type Quatd = math::Quaternion<f64>;
