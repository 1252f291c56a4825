//! Quaternion and small dense linear algebra.

mod mat3;
mod mat3x4;
mod quaternion;
mod vec3;

pub use mat3::Mat3;
pub use mat3x4::{norm4, norm_inf4, Mat3x4, Mat4x3, Vec4};
pub use quaternion::{Quaternion, ANTIPARALLEL_TOL};
pub use vec3::Vec3;

pub use crate::scalar::sign_plus;
