//! Four-wheel pyramid cluster: geometry, pseudo-inverse allocation, per-wheel torque dynamics
//! with saturation, and the inscribed-sphere momentum/torque envelope.

use crate::error::{Error, Result};
use crate::math::{Mat3x4, Mat4x3, Vec3, Vec4};
use crate::rigid_body::{DisturbanceModel, InertiaModel};
use crate::scalar::Real;

/// Numerator coefficients of `H_rw(s) = (b1 s + b0) / (s² + a1 s + a0)`.
const HRW_B1: f64 = 1.214;
const HRW_B0: f64 = 0.7625;
const HRW_A1: f64 = 2.40;
const HRW_A0: f64 = 0.7625;

/// Spin-axis matrix `Z` of a pyramid with azimuth `alpha` and elevation `beta` (radians).
pub fn z_matrix<T: Real>(alpha: T, beta: T) -> Mat3x4<T> {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    Mat3x4 {
        cols: [
            Vec3::new(ca * cb, sa * cb, sb),
            Vec3::new(-sa * cb, ca * cb, sb),
            Vec3::new(-ca * cb, -sa * cb, sb),
            Vec3::new(sa * cb, -ca * cb, sb),
        ],
    }
}

/// What the envelope is computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeKind {
    Momentum,
    Torque,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwCluster<T> {
    alpha: T,
    beta: T,
    tau_w_max: T,
    h_w_max: T,
    z: Mat3x4<T>,
    z_pinv: Mat4x3<T>,
}

impl<T: Real> RwCluster<T> {
    pub fn new(alpha: T, beta: T, tau_w_max: T, h_w_max: T) -> Result<Self> {
        if !(tau_w_max > T::zero() && h_w_max > T::zero()) {
            return Err(Error::InvalidParameter(
                "wheel torque and momentum limits must be positive".into(),
            ));
        }
        if !(alpha.is_finite() && beta > T::zero() && beta < T::FRAC_PI_2()) {
            return Err(Error::DegenerateGeometry(format!(
                "elevation must lie in (0, 90) deg, got {} deg",
                beta.to_degrees()
            )));
        }
        let z = z_matrix(alpha, beta);
        let z_pinv = z
            .pseudo_inverse()
            .ok_or_else(|| Error::DegenerateGeometry("Z Zᵀ is singular".into()))?;
        Ok(Self {
            alpha,
            beta,
            tau_w_max,
            h_w_max,
            z,
            z_pinv,
        })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn tau_w_max(&self) -> T {
        self.tau_w_max
    }

    pub fn h_w_max(&self) -> T {
        self.h_w_max
    }

    pub fn z(&self) -> &Mat3x4<T> {
        &self.z
    }

    pub fn z_pinv(&self) -> &Mat4x3<T> {
        &self.z_pinv
    }

    /// Minimum-norm wheel torques producing `tau_body`.
    pub fn allocate(&self, tau_body: &Vec3<T>) -> Vec4<T> {
        self.z_pinv.mul_vec3(tau_body)
    }

    /// `Z x`: wheel-axis quantities to body axes.
    pub fn wheels_to_body(&self, x_w: &Vec4<T>) -> Vec3<T> {
        self.z.mul_vec4(x_w)
    }

    /// Inscribed-sphere radius of the momentum or torque zonotope.
    pub fn envelope_radius(&self, kind: EnvelopeKind) -> Result<T> {
        let cap = match kind {
            EnvelopeKind::Momentum => self.h_w_max,
            EnvelopeKind::Torque => self.tau_w_max,
        };
        envelope_radius(&self.z, cap)
    }
}

/// Radius of the largest origin-centred sphere inside `{Z x : |x_i| ≤ cap}`.
///
/// Every facet is spanned by two wheel axes `z_i, z_j` with the remaining wheels pinned at
/// `±cap`; its plane has normal `n = z_i × z_j` and offset `Σ_k |n̂ᵀ z_k| cap`.
pub fn envelope_radius<T: Real>(z: &Mat3x4<T>, cap: T) -> Result<T> {
    let dedup_tol = T::lit(1e-12);
    let mut normals: Vec<Vec3<T>> = Vec::new();
    let mut radius = T::infinity();
    for i in 0..4 {
        for j in (i + 1)..4 {
            let n = z.cols[i].cross(&z.cols[j]);
            let n = n.try_normalize().filter(|_| n.norm() > dedup_tol).ok_or_else(|| {
                Error::DegenerateGeometry(format!("wheels {} and {} are collinear", i + 1, j + 1))
            })?;
            // facets come in ± pairs and coplanar wheel pairs repeat planes
            if normals
                .iter()
                .any(|m| n.cross(m).norm() < dedup_tol)
            {
                continue;
            }
            normals.push(n);
            let mut offset = T::zero();
            for (k, zk) in z.cols.iter().enumerate() {
                if k != i && k != j {
                    offset = offset + n.dot(zk).abs() * cap;
                }
            }
            if offset <= dedup_tol * cap {
                return Err(Error::DegenerateGeometry(format!(
                    "facet of wheels {} and {} passes through the origin",
                    i + 1,
                    j + 1
                )));
            }
            radius = radius.min(offset);
        }
    }
    Ok(radius)
}

/// Largest body rate that keeps the wheels out of momentum saturation:
/// `ω̄ = (H̄ − h̄_d) / ‖Ī‖`.
pub fn omega_max<T: Real>(
    h_bar: T,
    dist: &DisturbanceModel<T>,
    inertia: &InertiaModel<T>,
) -> Result<T> {
    let h_d = dist.momentum_bound();
    if h_bar <= h_d {
        return Err(Error::InfeasibleActuation {
            h_bar: h_bar.to_f64().unwrap_or(f64::NAN),
            h_d: h_d.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok((h_bar - h_d) / inertia.upper().norm2())
}

/// Bilinear discretization of the wheel torque-tracking transfer function, in transposed
/// direct form II.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WheelFilter<T> {
    pub b: [T; 3],
    /// `a[0] = 1`.
    pub a: [T; 3],
}

impl<T: Real> WheelFilter<T> {
    pub fn bilinear(dt: T) -> Self {
        let k = T::lit(2.0) / dt;
        let (b1, b0) = (T::lit(HRW_B1), T::lit(HRW_B0));
        let (a1, a0) = (T::lit(HRW_A1), T::lit(HRW_A0));
        let two = T::lit(2.0);
        let den = k * k + a1 * k + a0;
        Self {
            b: [(b1 * k + b0) / den, two * b0 / den, (b0 - b1 * k) / den],
            a: [T::one(), (two * a0 - two * k * k) / den, (k * k - a1 * k + a0) / den],
        }
    }

    /// Poles of the discrete filter as (re, im) pairs.
    pub fn poles(&self) -> [(T, T); 2] {
        let (p, q) = (self.a[1], self.a[2]);
        let disc = p * p - T::lit(4.0) * q;
        let half = T::lit(0.5);
        if disc >= T::zero() {
            let r = disc.sqrt();
            [((-p + r) * half, T::zero()), ((-p - r) * half, T::zero())]
        } else {
            let r = (-disc).sqrt();
            [(-p * half, r * half), (-p * half, -r * half)]
        }
    }

    pub fn dc_gain(&self) -> T {
        (self.b[0] + self.b[1] + self.b[2]) / (self.a[0] + self.a[1] + self.a[2])
    }
}

/// Per-wheel momentum and filter memory.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WheelState<T> {
    /// N m s.
    pub h_w: Vec4<T>,
    pub filter_state: [[T; 2]; 4],
}

impl<T: Real> WheelState<T> {
    pub fn zero() -> Self {
        Self {
            h_w: [T::zero(); 4],
            filter_state: [[T::zero(); 2]; 4],
        }
    }

    pub fn with_momentum(h_w: Vec4<T>) -> Self {
        Self {
            h_w,
            ..Self::zero()
        }
    }
}

/// Which saturation blocks were active during a wheel step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SaturationFlags {
    pub torque: [bool; 4],
    pub momentum: [bool; 4],
}

impl SaturationFlags {
    pub fn any(&self) -> bool {
        self.torque.iter().chain(&self.momentum).any(|&f| f)
    }
}

/// One plant step of the wheels: clamp the command, filter it, integrate `ḣʷ = −τʷ`, clamp the
/// momentum. When the momentum clamp bites, the delivered torque is reduced to what the clamp
/// allows, so only the component deepening saturation is removed.
pub fn wheel_step<T: Real>(
    ws: &WheelState<T>,
    tau_w_cmd: &Vec4<T>,
    dt: T,
    cluster: &RwCluster<T>,
    filter: &WheelFilter<T>,
) -> (WheelState<T>, Vec4<T>, SaturationFlags) {
    let tmax = cluster.tau_w_max;
    let hmax = cluster.h_w_max;
    let mut next = *ws;
    let mut tau = [T::zero(); 4];
    let mut flags = SaturationFlags::default();
    for i in 0..4 {
        let cmd = tau_w_cmd[i];
        let x = cmd.max(-tmax).min(tmax);
        flags.torque[i] = x != cmd;
        let [s1, s2] = ws.filter_state[i];
        let y = filter.b[0] * x + s1;
        next.filter_state[i] = [
            filter.b[1] * x - filter.a[1] * y + s2,
            filter.b[2] * x - filter.a[2] * y,
        ];
        // the drive electronics cannot deliver more than the rated torque either
        let y_sat = y.max(-tmax).min(tmax);
        flags.torque[i] |= y_sat != y;
        let h_free = ws.h_w[i] - y_sat * dt;
        let h_new = h_free.max(-hmax).min(hmax);
        flags.momentum[i] = h_new != h_free;
        tau[i] = if flags.momentum[i] {
            (ws.h_w[i] - h_new) / dt
        } else {
            y_sat
        };
        next.h_w[i] = h_new;
    }
    (next, tau, flags)
}
