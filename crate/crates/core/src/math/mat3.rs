use super::Vec3;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

/// Dense 3x3 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(
    from = "[[T; 3]; 3]",
    into = "[[T; 3]; 3]",
    bound(serialize = "T: Copy + Serialize", deserialize = "T: Deserialize<'de>")
)]
pub struct Mat3<T> {
    pub m: [[T; 3]; 3],
}

impl<T> From<[[T; 3]; 3]> for Mat3<T> {
    fn from(m: [[T; 3]; 3]) -> Self {
        Self { m }
    }
}

impl<T> From<Mat3<T>> for [[T; 3]; 3] {
    fn from(m: Mat3<T>) -> Self {
        m.m
    }
}

const JACOBI_SWEEPS: usize = 64;

impl<T: Real> Mat3<T> {
    pub const fn from_rows(m: [[T; 3]; 3]) -> Self {
        Self { m }
    }

    pub fn from_f64(m: [[f64; 3]; 3]) -> Self {
        Self::from_fn(|i, j| T::lit(m[i][j]))
    }

    pub fn from_fn(f: impl Fn(usize, usize) -> T) -> Self {
        let mut m = [[T::zero(); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(i, j);
            }
        }
        Self { m }
    }

    pub fn zero() -> Self {
        Self::from_fn(|_, _| T::zero())
    }

    pub fn identity() -> Self {
        Self::diag(Vec3::splat(T::one()))
    }

    pub fn diag(d: Vec3<T>) -> Self {
        Self::from_fn(|i, j| if i == j { d[i] } else { T::zero() })
    }

    /// Skew-symmetric cross-product matrix: `skew(x) * y == x.cross(y)`.
    pub fn skew(x: Vec3<T>) -> Self {
        let z = T::zero();
        Self::from_rows([[z, -x.z, x.y], [x.z, z, -x.x], [-x.y, x.x, z]])
    }

    pub fn outer(a: Vec3<T>, b: Vec3<T>) -> Self {
        Self::from_fn(|i, j| a[i] * b[j])
    }

    pub fn row(&self, i: usize) -> Vec3<T> {
        Vec3::new(self.m[i][0], self.m[i][1], self.m[i][2])
    }

    pub fn col(&self, j: usize) -> Vec3<T> {
        Vec3::new(self.m[0][j], self.m[1][j], self.m[2][j])
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.m[j][i])
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_fn(|i, j| self.m[i][j] * s)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::from_fn(|i, j| f(self.m[i][j]))
    }

    /// Elementwise absolute value.
    pub fn abs(&self) -> Self {
        self.map(|v| v.abs())
    }

    /// Elementwise maximum.
    pub fn max_elementwise(&self, o: &Self) -> Self {
        Self::from_fn(|i, j| self.m[i][j].max(o.m[i][j]))
    }

    /// `true` when every element of `self` is `<=` the matching element of `o`.
    pub fn le_elementwise(&self, o: &Self) -> bool {
        self.iter().zip(o.iter()).all(|(a, b)| a <= b)
    }

    /// `true` when every element of `self` is strictly below the matching element of `o`.
    pub fn lt_elementwise(&self, o: &Self) -> bool {
        self.iter().zip(o.iter()).all(|(a, b)| a < b)
    }

    pub fn iter(&self) -> impl Iterator<Item = T> + '_ {
        self.m.iter().flat_map(|r| r.iter().copied())
    }

    pub fn max_abs(&self) -> T {
        self.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }

    pub fn trace(&self) -> T {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn det(&self) -> T {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Inverse by cofactors; `None` if the matrix is numerically singular.
    pub fn try_inverse(&self) -> Option<Self> {
        let m = &self.m;
        let det = self.det();
        let scale = self.max_abs();
        if !det.is_finite() || scale == T::zero() {
            return None;
        }
        // relative singularity test against the cube of the entry scale
        if det.abs() <= T::eps() * T::lit(16.0) * scale * scale * scale {
            return None;
        }
        let c = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
        let adj = [
            [c(1, 2, 1, 2), -c(0, 2, 1, 2), c(0, 1, 1, 2)],
            [-c(1, 2, 0, 2), c(0, 2, 0, 2), -c(0, 1, 0, 2)],
            [c(1, 2, 0, 1), -c(0, 2, 0, 1), c(0, 1, 0, 1)],
        ];
        Some(Self::from_rows(adj).scale(T::one() / det))
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        (0..3).all(|i| (0..3).all(|j| (self.m[i][j] - self.m[j][i]).abs() <= tol))
    }

    /// `(A + Aᵀ) / 2`.
    pub fn symmetrize(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(|i, j| (self.m[i][j] + self.m[j][i]) * half)
    }

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
    pub fn symmetric_eigenvalues(&self) -> [T; 3] {
        let mut a = self.symmetrize().m;
        for _ in 0..JACOBI_SWEEPS {
            let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
            let diag = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
            if off <= T::eps() * T::eps() * diag || off == T::zero() {
                break;
            }
            for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
                if a[p][q] == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..3 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..3 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
        let mut ev = [a[0][0], a[1][1], a[2][2]];
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
        ev
    }

    /// Singular values, descending.
    pub fn singular_values(&self) -> [T; 3] {
        let ev = (self.transpose() * *self).symmetric_eigenvalues();
        [ev[2], ev[1], ev[0]].map(|v| v.max(T::zero()).sqrt())
    }

    /// l2-induced norm (largest singular value).
    pub fn norm2(&self) -> T {
        self.singular_values()[0]
    }

    /// l1-induced norm (largest absolute column sum).
    pub fn norm1(&self) -> T {
        (0..3)
            .map(|j| self.col(j).norm_l1())
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Symmetric positive definiteness via leading principal minors.
    pub fn is_spd(&self, sym_tol: T) -> bool {
        let m = &self.m;
        self.is_symmetric(sym_tol)
            && m[0][0] > T::zero()
            && m[0][0] * m[1][1] - m[0][1] * m[1][0] > T::zero()
            && self.det() > T::zero()
    }

    pub fn cast<U: Real>(&self) -> Mat3<U> {
        Mat3::from_fn(|i, j| U::lit(self.m[i][j].to_f64().unwrap_or(f64::NAN)))
    }
}

impl<T> Index<(usize, usize)> for Mat3<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.m[i][j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat3<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.m[i][j]
    }
}

impl<T: Real> Mul<Vec3<T>> for Mat3<T> {
    type Output = Vec3<T>;
    #[inline]
    fn mul(self, v: Vec3<T>) -> Vec3<T> {
        Vec3::new(self.row(0).dot(&v), self.row(1).dot(&v), self.row(2).dot(&v))
    }
}

impl<T: Real> Mul for Mat3<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::from_fn(|i, j| self.row(i).dot(&o.col(j)))
    }
}

impl<T: Real> Add for Mat3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::from_fn(|i, j| self.m[i][j] + o.m[i][j])
    }
}

impl<T: Real> Sub for Mat3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::from_fn(|i, j| self.m[i][j] - o.m[i][j])
    }
}

impl<T: Real> Neg for Mat3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> Mat3<f64> {
        Mat3::from_f64([[30.0, -3.0, 0.0], [-3.0, 30.0, -2.0], [0.0, -2.0, 40.0]])
    }

    #[test]
    fn inverse_roundtrip() {
        let a = reference();
        let ai = a.try_inverse().unwrap();
        let e = a * ai - Mat3::identity();
        assert!(e.max_abs() < 1e-14);
        assert!(Mat3::<f64>::zero().try_inverse().is_none());
    }

    #[test]
    fn eigenvalues_of_diagonal_and_rotated() {
        let d = Mat3::diag(Vec3::new(3.0, 1.0, 2.0));
        assert_eq!(d.symmetric_eigenvalues(), [1.0, 2.0, 3.0]);
        // trace and determinant are invariants
        let ev = reference().symmetric_eigenvalues();
        assert!((ev.iter().sum::<f64>() - 100.0).abs() < 1e-10);
        assert!((ev.iter().product::<f64>() - reference().det()).abs() < 1e-7);
    }

    #[test]
    fn norms() {
        // power iteration on AᵀA as an independent route to the spectral norm
        let a = reference();
        let ata = a.transpose() * a;
        let mut v = Vec3::new(1.0, 0.3, -0.2);
        for _ in 0..500 {
            v = (ata * v).try_normalize().unwrap();
        }
        let power = (ata * v).norm().sqrt();
        assert!((a.norm2() - power).abs() < 1e-10);
        assert!((a.norm2() - 40.418_637_702_07).abs() < 1e-9);
        assert_eq!(a.norm1(), 42.0);
        let nonsym: Mat3<f64> = Mat3::from_f64([[1.0, 2.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.5]]);
        assert!((nonsym.norm2() - (1.0 + 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn skew_matches_cross() {
        let x = Vec3::new(0.3, -1.2, 2.0);
        let y = Vec3::new(-0.7, 0.1, 0.4);
        let d = Mat3::skew(x) * y - x.cross(&y);
        assert!(d.norm() < 1e-15);
    }

    #[test]
    fn spd_detection() {
        assert!(reference().is_spd(0.0));
        assert!(!Mat3::diag(Vec3::new(1.0, -1.0, 1.0)).is_spd(0.0));
    }
}
