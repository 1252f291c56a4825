use super::{Mat3, Vec3};
use crate::error::{Error, Result};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::ops::Mul;

/// Below this value of `1 + m·n` the shortest rotation between two unit vectors has no axis.
pub const ANTIPARALLEL_TOL: f64 = 1e-12;

/// Unit attitude quaternion, scalar first: `q = [eta, eps]`.
///
/// Every constructor and every operation returning a `Quaternion` renormalizes, so the unit-norm
/// invariant holds to rounding. When used as an attitude, `q` rotates body-frame vectors into
/// the inertial frame (`v_I = R(q)ᵀ v_B`) and obeys `q̇ = ½ q ⊗ [0, ω_B]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "[T; 4]",
    into = "[T; 4]",
    bound(
        serialize = "T: Real + Serialize",
        deserialize = "T: Real + Deserialize<'de>"
    )
)]
pub struct Quaternion<T> {
    eta: T,
    eps: Vec3<T>,
}

impl<T: Real> TryFrom<[T; 4]> for Quaternion<T> {
    type Error = Error;
    fn try_from(a: [T; 4]) -> Result<Self> {
        Self::from_array(a)
    }
}

impl<T: Real> From<Quaternion<T>> for [T; 4] {
    fn from(q: Quaternion<T>) -> Self {
        q.to_array()
    }
}

impl<T: Real> Default for Quaternion<T> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<T: Real> Quaternion<T> {
    /// Normalizes `[eta, eps]` into a unit quaternion.
    pub fn new(eta: T, eps: Vec3<T>) -> Result<Self> {
        let n = (eta * eta + eps.norm_squared()).sqrt();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::DegenerateQuaternion);
        }
        Ok(Self {
            eta: eta / n,
            eps: eps / n,
        })
    }

    pub fn from_array(a: [T; 4]) -> Result<Self> {
        Self::new(a[0], Vec3::new(a[1], a[2], a[3]))
    }

    pub fn from_f64(a: [f64; 4]) -> Result<Self> {
        Self::from_array(a.map(T::lit))
    }

    pub fn identity() -> Self {
        Self {
            eta: T::one(),
            eps: Vec3::zero(),
        }
    }

    /// Rotation by `angle` radians about `axis` (need not be unit length).
    pub fn from_axis_angle(axis: Vec3<T>, angle: T) -> Result<Self> {
        let a = axis.try_normalize().ok_or(Error::DegenerateQuaternion)?;
        let half = angle * T::lit(0.5);
        Self::new(half.cos(), a * half.sin())
    }

    #[inline]
    pub fn eta(&self) -> T {
        self.eta
    }

    #[inline]
    pub fn eps(&self) -> Vec3<T> {
        self.eps
    }

    pub fn to_array(&self) -> [T; 4] {
        [self.eta, self.eps.x, self.eps.y, self.eps.z]
    }

    pub fn norm(&self) -> T {
        (self.eta * self.eta + self.eps.norm_squared()).sqrt()
    }

    /// `[eta, -eps]`.
    pub fn conj(&self) -> Self {
        Self {
            eta: self.eta,
            eps: -self.eps,
        }
    }

    /// `-q`, the same attitude on the other hemisphere.
    pub fn negated(&self) -> Self {
        Self {
            eta: -self.eta,
            eps: -self.eps,
        }
    }

    /// Hamilton product `self ⊗ rhs`, renormalized.
    pub fn mul(&self, rhs: &Self) -> Self {
        let (e1, v1) = (self.eta, self.eps);
        let (e2, v2) = (rhs.eta, rhs.eps);
        let eta = e1 * e2 - v1.dot(&v2);
        let eps = v2 * e1 + v1 * e2 + v1.cross(&v2);
        // both factors are unit, so the product norm is 1 up to rounding
        Self::new(eta, eps).unwrap_or_else(|_| Self::identity())
    }

    /// Error quaternion `conj(reference) ⊗ self`.
    pub fn error_from(&self, reference: &Self) -> Self {
        Quaternion::mul(&reference.conj(), self)
    }

    /// `R(q) = (η² − εᵀε) I + 2 ε εᵀ − 2 η ε×`, mapping inertial vectors into the body frame.
    pub fn rotation_matrix(&self) -> Mat3<T> {
        let (e, v) = (self.eta, self.eps);
        let two = T::lit(2.0);
        Mat3::identity().scale(e * e - v.norm_squared()) + Mat3::outer(v, v).scale(two)
            - Mat3::skew(v).scale(two * e)
    }

    /// Expresses an inertial-frame vector in body coordinates (`R(q) v`).
    pub fn to_body(&self, v_inertial: &Vec3<T>) -> Vec3<T> {
        self.rotation_matrix() * *v_inertial
    }

    /// Expresses a body-frame vector in inertial coordinates (`R(q)ᵀ v`).
    pub fn to_inertial(&self, v_body: &Vec3<T>) -> Vec3<T> {
        self.rotation_matrix().transpose() * *v_body
    }

    /// Principal rotation angle in `[0, 2π]` for this representative.
    pub fn rotation_angle(&self) -> T {
        T::lit(2.0) * self.eps.norm().atan2(self.eta)
    }

    /// Kinematic rate `q̇ = ½ q ⊗ [0, ω]` with `ω` in body coordinates, as raw components.
    pub fn kinematics(&self, omega: &Vec3<T>) -> [T; 4] {
        let half = T::lit(0.5);
        let eta_dot = -omega.dot(&self.eps) * half;
        let eps_dot = (*omega * self.eta - omega.cross(&self.eps)) * half;
        [eta_dot, eps_dot.x, eps_dot.y, eps_dot.z]
    }

    /// One classical RK4 step of the kinematics under a constant body rate, renormalized.
    pub fn propagate(&self, omega: &Vec3<T>, dt: T) -> Self {
        let raw = self.to_array();
        let eval = |s: [T; 4]| -> [T; 4] {
            let q = Self {
                eta: s[0],
                eps: Vec3::new(s[1], s[2], s[3]),
            };
            q.kinematics(omega)
        };
        let axpy = |a: [T; 4], k: [T; 4], h: T| -> [T; 4] {
            [a[0] + k[0] * h, a[1] + k[1] * h, a[2] + k[2] * h, a[3] + k[3] * h]
        };
        let half = dt * T::lit(0.5);
        let k1 = eval(raw);
        let k2 = eval(axpy(raw, k1, half));
        let k3 = eval(axpy(raw, k2, half));
        let k4 = eval(axpy(raw, k3, dt));
        let sixth = dt / T::lit(6.0);
        let two = T::lit(2.0);
        let next: [T; 4] =
            std::array::from_fn(|i| raw[i] + (k1[i] + two * k2[i] + two * k3[i] + k4[i]) * sixth);
        Self::from_array(next).unwrap_or(*self)
    }

    /// Shortest rotation taking unit vector `m_inertial` onto unit vector `n`.
    ///
    /// Built from `a = mᵀn`, `b = m × n` as `[1 + a, b] / ‖[1 + a, b]‖`, so `η ≥ 0` and
    /// `η = cos(θ/2)` with `θ` the angle between the vectors.
    pub fn shortest_rotation(m_inertial: &Vec3<T>, n: &Vec3<T>) -> Result<Self> {
        let a = m_inertial.dot(n);
        if T::one() + a < T::lit(ANTIPARALLEL_TOL) {
            return Err(Error::AntiparallelAxes);
        }
        let b = m_inertial.cross(n);
        Self::new(T::one() + a, b)
    }

    pub fn cast<U: Real>(&self) -> Quaternion<U> {
        let a = self.to_array().map(|v| U::lit(v.to_f64().unwrap_or(f64::NAN)));
        Quaternion::from_array(a).unwrap_or_else(|_| Quaternion::identity())
    }
}

impl<T: Real> Mul for Quaternion<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Quaternion::mul(&self, &rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    type Q = Quaternion<f64>;

    fn close(a: [f64; 4], b: [f64; 4], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn identity_and_inverse() {
        let q = Q::from_f64([0.3, -0.2, 0.9, 0.1]).unwrap();
        assert!(close((Q::identity() * q).to_array(), q.to_array(), 1e-15));
        assert!(close((q * q.conj()).to_array(), [1.0, 0.0, 0.0, 0.0], 1e-15));
    }

    #[test]
    fn two_quarter_turns_about_z() {
        let c = FRAC_PI_4.cos();
        let s = FRAC_PI_4.sin();
        let a = Q::from_f64([c, 0.0, 0.0, s]).unwrap();
        // independent route: axis-angle composition of two 90 degree turns
        let expected = Q::from_axis_angle(Vec3::unit_z(), std::f64::consts::PI).unwrap();
        let p = a * a;
        assert!(close(p.to_array(), expected.to_array(), 1e-15));
        assert!(close(p.to_array(), [0.0, 0.0, 0.0, 1.0], 1e-15));
    }

    #[test]
    fn conjugate_cases() {
        assert_eq!(Q::identity().conj(), Q::identity());
        let q = Q::from_f64([0.5, 0.5, 0.5, 0.5]).unwrap();
        assert_eq!(q.conj().to_array(), [0.5, -0.5, -0.5, -0.5]);
        assert_eq!(q.conj().conj(), q);
    }

    #[test]
    fn rotation_matrix_cases() {
        assert_eq!(Q::identity().rotation_matrix(), Mat3::identity());
        let q = Q::from_f64([FRAC_PI_4.cos(), 0.0, 0.0, FRAC_PI_4.sin()]).unwrap();
        let r = q.rotation_matrix();
        // direction cosine matrix of a frame rotated +90 deg about z
        let dcm = Mat3::from_f64([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!((r - dcm).max_abs() < 1e-15);
        let rx = r * Vec3::unit_x();
        assert!((rx - (-Vec3::unit_y())).norm() < 1e-15);
        assert!((r.det() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn error_cases() {
        let q = Q::from_f64([-0.306, 0.530, 0.660, -0.436]).unwrap();
        assert!(close(q.error_from(&q).to_array(), [1.0, 0.0, 0.0, 0.0], 1e-15));
        assert!(close(q.error_from(&Q::identity()).to_array(), q.to_array(), 1e-15));
    }

    #[test]
    fn shortest_rotation_cases() {
        let x = Vec3::unit_x();
        let y = Vec3::unit_y();
        assert_eq!(Q::shortest_rotation(&x, &x).unwrap(), Q::identity());
        let q = Q::shortest_rotation(&x, &y).unwrap();
        assert!((q.eta() - FRAC_PI_4.cos()).abs() < 1e-15);
        assert!(q.eps().x.abs() < 1e-15 && q.eps().y.abs() < 1e-15);
        assert!((q.eps().z - FRAC_PI_4.sin()).abs() < 1e-15);
        assert!((q.to_inertial(&x) - y).norm() < 1e-15);
        assert_eq!(Q::shortest_rotation(&x, &(-x)), Err(Error::AntiparallelAxes));
    }

    #[test]
    fn degenerate_components_rejected() {
        assert_eq!(Q::from_f64([0.0; 4]), Err(Error::DegenerateQuaternion));
        assert_eq!(Q::from_f64([f64::NAN, 0.0, 0.0, 0.0]), Err(Error::DegenerateQuaternion));
    }

    #[test]
    fn constant_rate_propagation_matches_closed_form() {
        let w = Vec3::new(0.01, -0.02, 0.015);
        let dt = 0.1;
        let mut q = Q::identity();
        for _ in 0..1000 {
            q = q.propagate(&w, dt);
        }
        let exact = Q::from_axis_angle(w, w.norm() * 100.0).unwrap();
        assert!(close(q.to_array(), exact.to_array(), 1e-12));
    }

    #[test]
    fn works_in_single_precision() {
        let a = Quaternion::<f32>::from_f64([0.9, 0.1, -0.3, 0.2]).unwrap();
        let b = Quaternion::<f32>::from_axis_angle(Vec3::unit_y(), 0.4).unwrap();
        assert!(((a * b).norm() - 1.0).abs() < 1e-6);
    }
}
