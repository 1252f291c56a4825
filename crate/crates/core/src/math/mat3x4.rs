use super::{Mat3, Vec3};
use crate::scalar::Real;

/// Four-component vector, one entry per reaction wheel.
pub type Vec4<T> = [T; 4];

/// 3x4 matrix stored by columns (each column is a wheel spin axis in body coordinates).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3x4<T> {
    pub cols: [Vec3<T>; 4],
}

/// 4x3 matrix stored by rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat4x3<T> {
    pub rows: [Vec3<T>; 4],
}

impl<T: Real> Mat3x4<T> {
    pub fn mul_vec4(&self, x: &Vec4<T>) -> Vec3<T> {
        self.cols
            .iter()
            .zip(x)
            .fold(Vec3::zero(), |acc, (c, &xi)| acc + *c * xi)
    }

    pub fn transpose(&self) -> Mat4x3<T> {
        Mat4x3 { rows: self.cols }
    }

    /// `Z Zᵀ`.
    pub fn gram(&self) -> Mat3<T> {
        self.cols
            .iter()
            .fold(Mat3::zero(), |acc, c| acc + Mat3::outer(*c, *c))
    }

    /// Moore-Penrose pseudo-inverse `Zᵀ (Z Zᵀ)⁻¹`; `None` if `Z` is rank deficient.
    pub fn pseudo_inverse(&self) -> Option<Mat4x3<T>> {
        let g_inv = self.gram().try_inverse()?;
        Some(Mat4x3 {
            rows: self.cols.map(|c| g_inv.transpose() * c),
        })
    }

    /// Smallest singular value.
    pub fn min_singular_value(&self) -> T {
        self.gram().symmetric_eigenvalues()[0].max(T::zero()).sqrt()
    }
}

impl<T: Real> Mat4x3<T> {
    pub fn mul_vec3(&self, v: &Vec3<T>) -> Vec4<T> {
        self.rows.map(|r| r.dot(v))
    }
}

/// Largest absolute entry of a 4-vector.
pub fn norm_inf4<T: Real>(x: &Vec4<T>) -> T {
    x.iter().fold(T::zero(), |a, v| a.max(v.abs()))
}

/// Euclidean norm of a 4-vector.
pub fn norm4<T: Real>(x: &Vec4<T>) -> T {
    x.iter().fold(T::zero(), |a, &v| a + v * v).sqrt()
}
