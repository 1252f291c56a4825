//! Rigid spacecraft plant: reaction-wheel actuated attitude dynamics with uncertain inertia,
//! a bounded environmental disturbance and a fixed-step RK4 integrator.

use crate::error::{Error, Result};
use crate::math::{Mat3, Quaternion, Vec3};
use crate::scalar::Real;

/// Index pairs of the six independent entries of a symmetric 3x3 matrix.
const SYM_ENTRIES: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

/// Nominal inertia, its elementwise uncertainty bound and the (sampled) true inertia, kg m².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaModel<T> {
    nominal: Mat3<T>,
    delta_bound: Mat3<T>,
    actual: Mat3<T>,
    nominal_inv: Mat3<T>,
    actual_inv: Mat3<T>,
}

impl<T: Real> InertiaModel<T> {
    pub fn new(nominal: Mat3<T>, delta_bound: Mat3<T>, actual: Mat3<T>) -> Result<Self> {
        let sym_tol = T::lit(1e-9) * nominal.max_abs();
        if !nominal.is_finite() || !nominal.is_spd(sym_tol) {
            return Err(Error::InvalidInertia("nominal inertia is not SPD".into()));
        }
        if !actual.is_finite() || !actual.is_spd(sym_tol) {
            return Err(Error::InvalidInertia("true inertia is not SPD".into()));
        }
        if !delta_bound.is_finite() || delta_bound.iter().any(|v| v < T::zero()) {
            return Err(Error::InvalidInertia(
                "uncertainty bound must be non-negative".into(),
            ));
        }
        // a zero nominal entry may only carry a zero bound
        let physical = nominal
            .iter()
            .zip(delta_bound.iter())
            .all(|(n, b)| b == T::zero() || b < n.abs());
        if !physical {
            return Err(Error::InvalidInertia(
                "uncertainty bound must stay below |I*| elementwise".into(),
            ));
        }
        let slack = T::lit(1e-12) * nominal.max_abs();
        if !(actual - nominal)
            .abs()
            .le_elementwise(&delta_bound.map(|b| b + slack))
        {
            return Err(Error::InvalidInertia(
                "true inertia outside the uncertainty box".into(),
            ));
        }
        let nominal_inv = nominal
            .try_inverse()
            .ok_or_else(|| Error::InvalidInertia("nominal inertia singular".into()))?;
        let actual_inv = actual
            .try_inverse()
            .ok_or_else(|| Error::InvalidInertia("true inertia singular".into()))?;
        Ok(Self {
            nominal,
            delta_bound,
            actual,
            nominal_inv,
            actual_inv,
        })
    }

    /// Perfectly known inertia.
    pub fn exact(nominal: Mat3<T>) -> Result<Self> {
        Self::new(nominal, Mat3::zero(), nominal)
    }

    /// Bound `fraction · |I*|`, true inertia equal to the nominal.
    pub fn with_relative_bound(nominal: Mat3<T>, fraction: T) -> Result<Self> {
        Self::new(nominal, nominal.abs().scale(fraction), nominal)
    }

    /// Same bounds, different true inertia.
    pub fn with_actual(&self, actual: Mat3<T>) -> Result<Self> {
        Self::new(self.nominal, self.delta_bound, actual)
    }

    pub fn nominal(&self) -> &Mat3<T> {
        &self.nominal
    }

    pub fn nominal_inv(&self) -> &Mat3<T> {
        &self.nominal_inv
    }

    pub fn delta_bound(&self) -> &Mat3<T> {
        &self.delta_bound
    }

    pub fn actual(&self) -> &Mat3<T> {
        &self.actual
    }

    pub fn actual_inv(&self) -> &Mat3<T> {
        &self.actual_inv
    }

    /// `Ī = I* + Δ̄`.
    pub fn upper(&self) -> Mat3<T> {
        self.nominal + self.delta_bound
    }

    /// `I̲ = I* − Δ̄`.
    pub fn lower(&self) -> Mat3<T> {
        self.nominal - self.delta_bound
    }

    /// Elementwise bound on `Δ̂ = (I* + Δ)⁻¹ − I*⁻¹` over the symmetric uncertainty box.
    ///
    /// Evaluates the matrix-inversion-lemma form at all 64 sign corners of the six independent
    /// entries of `Δ` and keeps the elementwise maximum magnitude.
    pub fn delta_hat_bound(&self) -> Result<Mat3<T>> {
        let mut bound = Mat3::zero();
        for corner in 0u32..(1 << SYM_ENTRIES.len()) {
            let mut delta = Mat3::zero();
            for (bit, &(i, j)) in SYM_ENTRIES.iter().enumerate() {
                let v = if corner & (1 << bit) != 0 {
                    self.delta_bound[(i, j)]
                } else {
                    -self.delta_bound[(i, j)]
                };
                delta[(i, j)] = v;
                delta[(j, i)] = v;
            }
            let dh = inverse_perturbation(&self.nominal_inv, &delta)?;
            bound = bound.max_elementwise(&dh.abs());
        }
        Ok(bound)
    }
}

/// `Δ̂ = −I*⁻¹ Δ (I + I*⁻¹ Δ)⁻¹ I*⁻¹`, the perturbation of the inverse inertia.
pub fn inverse_perturbation<T: Real>(nominal_inv: &Mat3<T>, delta: &Mat3<T>) -> Result<Mat3<T>> {
    let m = *nominal_inv * *delta;
    let inner = (Mat3::identity() + m)
        .try_inverse()
        .ok_or(Error::SingularPerturbation)?;
    Ok(-(m * inner * *nominal_inv))
}

/// Bias plus sinusoid on every body axis, clamped in norm to `d_bar`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisturbanceModel<T> {
    /// Secular part, N m.
    pub bias: Vec3<T>,
    /// Sinusoid amplitude per axis, N m.
    pub amp: Vec3<T>,
    /// Sinusoid frequency, rad/s.
    pub freq: T,
    /// Sinusoid phase, rad.
    pub phase: T,
    /// Norm bound on the total torque, N m.
    pub d_bar: T,
    /// Norm bound on the secular part, N m.
    pub d1_bar: T,
    /// Norm bound on the periodic part, N m.
    pub d2_bar: T,
    /// Orbital period, s.
    pub period: T,
}

impl<T: Real> DisturbanceModel<T> {
    pub fn none(period: T) -> Self {
        Self {
            bias: Vec3::zero(),
            amp: Vec3::zero(),
            freq: T::zero(),
            phase: T::zero(),
            d_bar: T::zero(),
            d1_bar: T::zero(),
            d2_bar: T::zero(),
            period,
        }
    }

    /// Disturbance torque at time `t`.
    pub fn at(&self, t: T) -> Vec3<T> {
        let s = (self.freq * t + self.phase).sin();
        let d = self.bias + Vec3::new(self.amp.x * s, self.amp.y * s, self.amp.z * s);
        let n = d.norm();
        if n > self.d_bar && n > T::zero() {
            d * (self.d_bar / n)
        } else {
            d
        }
    }

    /// Momentum injected over a quarter orbit, `h̄_d = (d̄₁ + 0.707 d̄₂) T / 4`.
    pub fn momentum_bound(&self) -> T {
        (self.d1_bar + T::lit(0.707) * self.d2_bar) * self.period / T::lit(4.0)
    }
}

/// Attitude and body rate of the spacecraft at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState<T> {
    pub q: Quaternion<T>,
    /// rad/s, body frame.
    pub omega: Vec3<T>,
    /// s.
    pub t: T,
}

impl<T: Real> PlantState<T> {
    pub fn at_rest(q: Quaternion<T>) -> Self {
        Self {
            q,
            omega: Vec3::zero(),
            t: T::zero(),
        }
    }
}

/// Inputs held constant over one plant step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantInputs<T> {
    /// Wheel reaction torque on the body (`τ = Z τʷ`), N m.
    pub tau: Vec3<T>,
    /// Wheel momentum in body axes at the start of the step, N m s; evolves as `ḣ = −τ`.
    pub h: Vec3<T>,
    /// Disturbance torque, N m.
    pub d: Vec3<T>,
}

impl<T: Real> PlantInputs<T> {
    pub fn zero() -> Self {
        Self {
            tau: Vec3::zero(),
            h: Vec3::zero(),
            d: Vec3::zero(),
        }
    }
}

/// Attitude kinematics and dynamics:
/// `η̇ = −½ωᵀε`, `ε̇ = ½(ηω − ω×ε)`, `ω̇ = I⁻¹(−ω×H + τ + d)` with `H = Iω + h`.
pub fn state_derivative<T: Real>(
    q: &Quaternion<T>,
    omega: &Vec3<T>,
    tau: &Vec3<T>,
    h: &Vec3<T>,
    d: &Vec3<T>,
    inertia: &InertiaModel<T>,
) -> ([T; 4], Vec3<T>) {
    let big_h = *inertia.actual() * *omega + *h;
    let omega_dot = *inertia.actual_inv() * (-omega.cross(&big_h) + *tau + *d);
    (q.kinematics(omega), omega_dot)
}

/// One classical RK4 step of the plant; quaternion renormalized on exit.
pub fn rk4_step<T: Real>(
    s: &PlantState<T>,
    dt: T,
    inputs: &PlantInputs<T>,
    inertia: &InertiaModel<T>,
) -> PlantState<T> {
    type Raw<T> = [T; 7];
    let pack = |q: [T; 4], w: Vec3<T>| -> Raw<T> { [q[0], q[1], q[2], q[3], w.x, w.y, w.z] };
    let f = |x: &Raw<T>, c: T| -> Raw<T> {
        // un-normalized stage quaternion: kinematics are linear in q, so no projection here
        let q = RawQuat([x[0], x[1], x[2], x[3]]);
        let w = Vec3::new(x[4], x[5], x[6]);
        let h = inputs.h - inputs.tau * c;
        let big_h = *inertia.actual() * w + h;
        let wd = *inertia.actual_inv() * (-w.cross(&big_h) + inputs.tau + inputs.d);
        pack(q.kinematics(&w), wd)
    };
    let x0 = pack(s.q.to_array(), s.omega);
    let half = dt * T::lit(0.5);
    let add = |a: &Raw<T>, k: &Raw<T>, h: T| -> Raw<T> { std::array::from_fn(|i| a[i] + k[i] * h) };
    let k1 = f(&x0, T::zero());
    let k2 = f(&add(&x0, &k1, half), half);
    let k3 = f(&add(&x0, &k2, half), half);
    let k4 = f(&add(&x0, &k3, dt), dt);
    let two = T::lit(2.0);
    let sixth = dt / T::lit(6.0);
    let x1: Raw<T> =
        std::array::from_fn(|i| x0[i] + (k1[i] + two * k2[i] + two * k3[i] + k4[i]) * sixth);
    PlantState {
        q: Quaternion::from_array([x1[0], x1[1], x1[2], x1[3]]).unwrap_or(s.q),
        omega: Vec3::new(x1[4], x1[5], x1[6]),
        t: s.t + dt,
    }
}

struct RawQuat<T>([T; 4]);

impl<T: Real> RawQuat<T> {
    fn kinematics(&self, w: &Vec3<T>) -> [T; 4] {
        let half = T::lit(0.5);
        let eta = self.0[0];
        let eps = Vec3::new(self.0[1], self.0[2], self.0[3]);
        let ed = (*w * eta - w.cross(&eps)) * half;
        [-w.dot(&eps) * half, ed.x, ed.y, ed.z]
    }
}

/// Total angular momentum `Rᵀ(q)(I ω + h)` resolved in the inertial frame.
pub fn inertial_momentum<T: Real>(
    s: &PlantState<T>,
    h: &Vec3<T>,
    inertia: &InertiaModel<T>,
) -> Vec3<T> {
    s.q.to_inertial(&(*inertia.actual() * s.omega + *h))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> Mat3<f64> {
        Mat3::from_f64([[30.0, -3.0, 0.0], [-3.0, 30.0, -2.0], [0.0, -2.0, 40.0]])
    }

    #[test]
    fn equilibrium_has_zero_derivatives() {
        let im = InertiaModel::exact(reference()).unwrap();
        let q = Quaternion::from_f64([0.3, 0.1, -0.5, 0.2]).unwrap();
        let z = Vec3::zero();
        let (qd, wd) = state_derivative(&q, &z, &z, &z, &z, &im);
        assert_eq!(qd, [0.0; 4]);
        assert_eq!(wd, z);
    }

    #[test]
    fn principal_axis_spin_is_steady() {
        let im = InertiaModel::exact(Mat3::diag(Vec3::new(30.0, 35.0, 40.0))).unwrap();
        let z = Vec3::zero();
        let (_, wd) = state_derivative(
            &Quaternion::identity(),
            &Vec3::new(0.001, 0.0, 0.0),
            &z,
            &z,
            &z,
            &im,
        );
        assert_eq!(wd, z);
    }

    #[test]
    fn disturbance_profile() {
        let m: DisturbanceModel<f64> = DisturbanceModel {
            bias: Vec3::splat(1e-6),
            amp: Vec3::splat(5e-5),
            freq: 1e-3,
            phase: 0.0,
            d_bar: 8.7e-5,
            d1_bar: 1e-6,
            d2_bar: 5e-5,
            period: 5828.0,
        };
        assert_eq!(m.at(0.0), Vec3::splat(1e-6));
        // per-axis peak before the norm clamp
        let peak = m.bias.x + m.amp.x;
        assert!((peak - 5.1e-5).abs() < 1e-18);
        for k in 0..10_000 {
            let t = k as f64 * 1.7;
            assert!(m.at(t).norm() <= m.d_bar * (1.0 + 1e-15));
        }
    }

    #[test]
    fn delta_hat_zero_bound() {
        let im = InertiaModel::exact(reference()).unwrap();
        assert_eq!(im.delta_hat_bound().unwrap(), Mat3::zero());
    }

    #[test]
    fn delta_hat_scalar_analogue() {
        // 1-D interval arithmetic: sup |1/(30+δ) − 1/30| over |δ| ≤ 6 is 6/(30·24)
        let im = InertiaModel::new(
            Mat3::diag(Vec3::splat(30.0)),
            Mat3::diag(Vec3::splat(6.0)),
            Mat3::diag(Vec3::splat(30.0)),
        )
        .unwrap();
        let b = im.delta_hat_bound().unwrap();
        let expected: f64 = 6.0 / (30.0 * 24.0);
        for i in 0..3 {
            assert!((b[(i, i)] - expected).abs() < 1e-15);
        }
        assert!((expected - 8.333_333_333e-3).abs() < 1e-12);
    }

    #[test]
    fn delta_hat_reference_keeps_denominator_positive() {
        let im = InertiaModel::with_relative_bound(reference(), 0.2).unwrap();
        let b = im.delta_hat_bound().unwrap();
        assert!(b.is_finite());
        assert!((b * reference()).norm1() < 1.0);
    }

    #[test]
    fn rejects_unphysical_inertia() {
        let bad = InertiaModel::new(reference(), reference().abs().scale(1.5), reference());
        assert!(matches!(bad, Err(Error::InvalidInertia(_))));
        let outside = InertiaModel::new(
            reference(),
            reference().abs().scale(0.1),
            reference() + Mat3::diag(Vec3::splat(5.0)),
        );
        assert!(matches!(outside, Err(Error::InvalidInertia(_))));
    }

    #[test]
    fn zero_dynamics_step_is_identity() {
        let im = InertiaModel::exact(reference()).unwrap();
        let s = PlantState::at_rest(Quaternion::from_f64([0.5, 0.5, 0.5, 0.5]).unwrap());
        let n = rk4_step(&s, 0.01, &PlantInputs::zero(), &im);
        assert_eq!(n.q, s.q);
        assert_eq!(n.omega, s.omega);
        assert!((n.t - 0.01).abs() < 1e-18);
    }

    #[test]
    fn full_revolution_about_z() {
        let im = InertiaModel::exact(Mat3::diag(Vec3::new(30.0, 35.0, 40.0))).unwrap();
        let w = 0.05;
        let steps = 4000;
        let dt = 2.0 * std::f64::consts::PI / w / steps as f64;
        let mut s = PlantState {
            q: Quaternion::identity(),
            omega: Vec3::new(0.0, 0.0, w),
            t: 0.0,
        };
        for _ in 0..steps {
            s = rk4_step(&s, dt, &PlantInputs::zero(), &im);
        }
        // one revolution flips the quaternion sign
        let a = s.q.to_array();
        let dist = a
            .iter()
            .zip([1.0, 0.0, 0.0, 0.0])
            .map(|(x, y)| (x.abs() - y).abs())
            .fold(0.0, f64::max);
        assert!(dist < 1e-6, "{a:?}");
    }
}
