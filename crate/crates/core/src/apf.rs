//! Potential-field guidance: attractive and repulsive rate fields, the combined reference rate,
//! reference attitude propagation and the multi-zone keep-out analysis.

use crate::error::{Error, Result};
use crate::math::{sign_plus, Quaternion, Vec3};
use crate::rigid_body::InertiaModel;
use crate::scalar::Real;

/// Below this `‖ε̃_j‖` the repulsion direction is undefined.
pub const FORBIDDEN_AXIS_TOL: f64 = 1e-6;

/// Inertial keep-out cone around `n_hat` with half-apex angle `theta_floor`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForbiddenZone<T> {
    n_hat: Vec3<T>,
    theta_floor: T,
    eps_floor: T,
}

impl<T: Real> ForbiddenZone<T> {
    /// `n` is normalized; the angle must lie in `(0, π/2)`.
    pub fn new(n: Vec3<T>, theta_floor: T) -> Result<Self> {
        let n_hat = n
            .try_normalize()
            .ok_or_else(|| Error::InvalidParameter("zone axis has zero length".into()))?;
        if !(theta_floor > T::zero() && theta_floor < T::FRAC_PI_2()) {
            return Err(Error::InvalidParameter(format!(
                "zone half-angle {} deg outside (0, 90)",
                theta_floor.to_degrees()
            )));
        }
        Ok(Self {
            n_hat,
            theta_floor,
            eps_floor: (theta_floor * T::lit(0.5)).sin(),
        })
    }

    pub fn n_hat(&self) -> Vec3<T> {
        self.n_hat
    }

    pub fn theta_floor(&self) -> T {
        self.theta_floor
    }

    /// `ε̲̃ = sin(θ̲/2)`.
    pub fn eps_floor(&self) -> T {
        self.eps_floor
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApfParams<T> {
    /// 1/s.
    pub alpha1: T,
    /// rad/s.
    pub alpha2: T,
    pub eps_e_bar: T,
    /// rad/s.
    pub omega_bar: T,
    /// Repulsive gain per zone, rad/s.
    pub zeta: Vec<T>,
}

/// Gains sized so that the attractive rate never exceeds `ω̄/2` and its derivative never
/// asks for more than `τ̄`: `ε̄_e = (ω̄/2)² / (‖Ī⁻¹‖ τ̄)`, `α₂ = ω̄/2`, `α₁ = α₂/ε̄_e`,
/// `ζ_j = α₂ ε̲̃_j²`.
pub fn apf_params<T: Real>(
    omega_bar: T,
    tau_bar: T,
    inertia: &InertiaModel<T>,
    zones: &[ForbiddenZone<T>],
) -> Result<ApfParams<T>> {
    if !(omega_bar > T::zero() && tau_bar > T::zero()) {
        return Err(Error::InvalidParameter(
            "rate and torque bounds must be positive".into(),
        ));
    }
    let upper_inv = inertia
        .upper()
        .try_inverse()
        .ok_or_else(|| Error::InvalidInertia("upper inertia bound singular".into()))?;
    let alpha2 = omega_bar * T::lit(0.5);
    let eps_e_bar = alpha2 * alpha2 / (upper_inv.norm2() * tau_bar);
    Ok(ApfParams {
        alpha1: alpha2 / eps_e_bar,
        alpha2,
        eps_e_bar,
        omega_bar,
        zeta: zones
            .iter()
            .map(|z| alpha2 * z.eps_floor() * z.eps_floor())
            .collect(),
    })
}

/// Attractive rate in body axes for the error `e_q = q_d* ⊗ q`: parabolic well
/// (`−α₁ ε_e`) inside `‖ε_e‖ ≤ ε̄_e`, constant-magnitude cone (`−α₂ ε_e/‖ε_e‖`) outside, both
/// times `sgn₊(η_e)` so the short way round is always taken.
pub fn attractive_rate<T: Real>(e_q: &Quaternion<T>, p: &ApfParams<T>) -> Vec3<T> {
    let e = e_q.eps();
    let n = e.norm();
    let s = sign_plus(e_q.eta());
    if n <= p.eps_e_bar {
        e * (-p.alpha1 * s)
    } else {
        e * (-p.alpha2 * s / n)
    }
}

/// Sum of the repulsive rates `−ζ_j ε̃_j / ‖ε̃_j‖³`, resolved in the inertial frame.
///
/// `ε̃_j` is the vector part of the shortest rotation from the inertial boresight
/// `m̂_I = Rᵀ(q) m̂` to `n̂_j`; the field turns the boresight away from every axis.
pub fn repulsive_rate<T: Real>(
    q: &Quaternion<T>,
    m_hat_body: &Vec3<T>,
    zones: &[ForbiddenZone<T>],
    p: &ApfParams<T>,
) -> Result<Vec3<T>> {
    let m_i = q.to_inertial(m_hat_body);
    let mut sum = Vec3::zero();
    for (j, zone) in zones.iter().enumerate() {
        let qt = Quaternion::shortest_rotation(&m_i, &zone.n_hat)?;
        let e = qt.eps();
        let n = e.norm();
        if n <= T::lit(FORBIDDEN_AXIS_TOL) {
            return Err(Error::BoresightOnForbiddenAxis {
                zone: j,
                eps_norm: n.to_f64().unwrap_or(f64::NAN),
            });
        }
        sum = sum - e * (p.zeta[j] / (n * n * n));
    }
    Ok(sum)
}

/// Reference body rate `ω* = ω_a + R(q) Σ_j ω_r,j`.
pub fn reference_rate<T: Real>(
    q: &Quaternion<T>,
    q_d: &Quaternion<T>,
    m_hat_body: &Vec3<T>,
    zones: &[ForbiddenZone<T>],
    p: &ApfParams<T>,
) -> Result<Vec3<T>> {
    let wa = attractive_rate(&q.error_from(q_d), p);
    let wr = repulsive_rate(q, m_hat_body, zones, p)?;
    Ok(wa + q.to_body(&wr))
}

/// Reference attitude and rate held by the guidance layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceState<T> {
    pub q_star: Quaternion<T>,
    /// rad/s, body frame.
    pub omega_star: Vec3<T>,
}

impl<T: Real> GuidanceState<T> {
    /// Reference starting at the current attitude, at rest.
    pub fn start(q0: Quaternion<T>) -> Self {
        Self {
            q_star: q0,
            omega_star: Vec3::zero(),
        }
    }
}

/// Integrates `q̇* = ½ q* ⊗ [0, ω*]` over `dt` with `ω*` held.
pub fn propagate_reference<T: Real>(
    g: &GuidanceState<T>,
    omega_star: &Vec3<T>,
    dt: T,
) -> GuidanceState<T> {
    GuidanceState {
        q_star: g.q_star.propagate(omega_star, dt),
        omega_star: *omega_star,
    }
}

/// Guaranteed clearance from zone `j_excluded` when the other zones sit at `theta_js`:
/// `θ̂ = 2 asin √( s̲² / (1 + Σ_{j≠j̲} s̲² / sin²(θ_j/2)) )`, `s̲ = sin(θ̲/2)`.
pub fn theta_hat<T: Real>(theta_js: &[T], theta_floor: T, j_excluded: usize) -> T {
    let half = T::lit(0.5);
    let s2 = (theta_floor * half).sin().powi(2);
    let sum = theta_js
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != j_excluded)
        .fold(T::zero(), |acc, (_, &th)| acc + s2 / (th * half).sin().powi(2));
    T::lit(2.0) * (s2 / (T::one() + sum)).sqrt().asin()
}

/// Minimum spacing between zones that keeps `‖ω*‖ ≤ ω̄`: `2 asin(√N sin(θ̲/2))`.
pub fn theta_min<T: Real>(n: usize, theta_floor: T) -> Result<T> {
    if n == 0 {
        return Err(Error::InvalidParameter("zone count must be at least 1".into()));
    }
    let s = T::lit(n as f64).sqrt() * (theta_floor * T::lit(0.5)).sin();
    if s > T::one() {
        return Err(Error::InfeasibleSpacing(s.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(T::lit(2.0) * s.asin())
}

/// Boresight clearance from one zone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margin<T> {
    /// Angle between boresight and zone axis, rad.
    pub theta: T,
    pub violated: bool,
}

/// Angle to every zone axis; a zone is violated when `‖ε̃_j‖ < ε̲̃_j` (the boundary is safe).
pub fn pointing_margins<T: Real>(
    q: &Quaternion<T>,
    m_hat_body: &Vec3<T>,
    zones: &[ForbiddenZone<T>],
) -> Vec<Margin<T>> {
    let m_i = q.to_inertial(m_hat_body);
    zones
        .iter()
        .map(|z| {
            let theta = m_i.angle_to(&z.n_hat);
            // rounding slack so a boresight placed exactly on the cone edge counts as outside
            let eps = (theta * T::lit(0.5)).sin();
            Margin {
                theta,
                violated: eps < z.eps_floor * (T::one() - T::lit(64.0) * T::eps()),
            }
        })
        .collect()
}
