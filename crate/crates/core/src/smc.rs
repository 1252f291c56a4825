//! Boundary-layer sliding-mode tracking controller and its closed-form gain synthesis.

use crate::error::{Error, Result};
use crate::math::{Mat3, Quaternion, Vec3};
use crate::rigid_body::InertiaModel;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmcParams<T> {
    /// 1/s.
    pub lambda: T,
    /// rad/s².
    pub gamma: T,
    /// Boundary-layer width, rad/s.
    pub sigma_bar: T,
}

impl<T: Real> SmcParams<T> {
    pub fn new(lambda: T, gamma: T, sigma_bar: T) -> Result<Self> {
        if !(lambda > T::zero() && gamma > T::zero() && sigma_bar > T::zero()) {
            return Err(Error::InvalidParameter(
                "lambda, gamma and sigma_bar must be positive".into(),
            ));
        }
        if sigma_bar >= lambda {
            return Err(Error::InvalidParameter(format!(
                "sigma_bar ({sigma_bar}) must be smaller than lambda ({lambda})"
            )));
        }
        Ok(Self {
            lambda,
            gamma,
            sigma_bar,
        })
    }

    /// Per-component saturation threshold `S = σ̄/√3`.
    pub fn s(&self) -> T {
        self.sigma_bar / T::lit(3.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingError<T> {
    pub e_omega: Vec3<T>,
    pub e_eps: Vec3<T>,
    pub e_eta: T,
    pub sigma: Vec3<T>,
}

/// `e_q = q*⁻¹ ⊗ q`, `e_ω = ω − ω*`, `σ = e_ω + λ e_ε`.
pub fn tracking_error<T: Real>(
    q: &Quaternion<T>,
    omega: &Vec3<T>,
    q_star: &Quaternion<T>,
    omega_star: &Vec3<T>,
    lambda: T,
) -> TrackingError<T> {
    let e_q = q.error_from(q_star);
    let e_omega = *omega - *omega_star;
    TrackingError {
        e_omega,
        e_eps: e_q.eps(),
        e_eta: e_q.eta(),
        sigma: e_omega + e_q.eps() * lambda,
    }
}

/// Componentwise `sign(σ_i)` outside `|σ_i| ≥ S`, `σ_i/S` inside.
pub fn sat<T: Real>(sigma: &Vec3<T>, s: T) -> Vec3<T> {
    sigma.map(|c| {
        if c.abs() >= s {
            c.signum()
        } else {
            c / s
        }
    })
}

/// `u = −γ sat(σ)` and the body torque `τ = I* u`.
pub fn control_input<T: Real>(
    te: &TrackingError<T>,
    p: &SmcParams<T>,
    i_star: &Mat3<T>,
) -> (Vec3<T>, Vec3<T>) {
    let u = sat(&te.sigma, p.s()) * (-p.gamma);
    (u, *i_star * u)
}

/// Asymptotic bound on `‖e_ε‖` once the sliding variable stays in the boundary layer.
pub fn accuracy_bound<T: Real>(p: &SmcParams<T>) -> T {
    p.sigma_bar / p.lambda
}

/// Quantities entering the gain formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainInputs<'a, T> {
    pub inertia: &'a InertiaModel<T>,
    pub omega_bar: T,
    pub h_bar: T,
    pub tau_bar: T,
    pub d_bar: T,
    pub lambda: T,
    pub k: T,
    pub eps_e_bar: T,
    /// Smallest zone floor `ε̲̃`; `None` without zones.
    pub eps_floor: Option<T>,
}

/// Every intermediate of the gain synthesis, reported whether or not it is feasible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainReport<T> {
    pub delta_hat_bar: Mat3<T>,
    pub eps_e_bar: T,
    pub eps_floor: Option<T>,
    pub psi: T,
    /// `γ/k`.
    pub gamma_unit: T,
    pub gamma: T,
    /// `τ̄/‖I*‖`.
    pub gamma_ceiling: T,
    /// Torque the worst case asks for at `k = 1`.
    pub tau_required: T,
    pub k: T,
    pub k_lo: T,
    pub k_hi: T,
    pub torque_feasible: bool,
}

impl<T: Real> GainReport<T> {
    pub fn margin_valid(&self) -> bool {
        self.k > self.k_lo && self.k < self.k_hi
    }
}

/// `ψ = 1 + (1 + ε̄_e)/(2ε̄_e) + (1 + ε̲̃)/ε̲̃`; the last term drops out without zones.
pub fn psi<T: Real>(eps_e_bar: T, eps_floor: Option<T>) -> T {
    let repulsive = eps_floor.map_or(T::zero(), |e| (T::one() + e) / e);
    T::one() + (T::one() + eps_e_bar) / (T::lit(2.0) * eps_e_bar) + repulsive
}

/// Evaluates the switching-gain formula
/// `γ = k [(‖I*⁻¹‖ + ‖Δ̂̄‖)(ω̄H̄ + d̄) + ψω̄² + √2 λ ω̄] / (1 − ‖Δ̂̄ I*‖₁)`
/// together with the torque feasibility test and the admissible `k` interval.
pub fn gain_report<T: Real>(g: &GainInputs<'_, T>) -> Result<GainReport<T>> {
    let i_star = g.inertia.nominal();
    let dh = g.inertia.delta_hat_bound()?;
    let psi = psi(g.eps_e_bar, g.eps_floor);
    let numer = (g.inertia.nominal_inv().norm2() + dh.norm2()) * (g.omega_bar * g.h_bar + g.d_bar)
        + psi * g.omega_bar * g.omega_bar
        + T::lit(2.0).sqrt() * g.lambda * g.omega_bar;
    let denom = T::one() - (dh * *i_star).norm1();
    let gamma_unit = if denom > T::zero() {
        numer / denom
    } else {
        T::infinity()
    };
    let norm_i = i_star.norm2();
    let tau_required = norm_i * gamma_unit;
    let k_hi = g.tau_bar / tau_required;
    Ok(GainReport {
        delta_hat_bar: dh,
        eps_e_bar: g.eps_e_bar,
        eps_floor: g.eps_floor,
        psi,
        gamma_unit,
        gamma: g.k * gamma_unit,
        gamma_ceiling: g.tau_bar / norm_i,
        tau_required,
        k: g.k,
        k_lo: T::one(),
        k_hi,
        torque_feasible: g.tau_bar > tau_required,
    })
}

/// Gain synthesis that refuses infeasible torque budgets and margins outside `(1, k_max)`.
pub fn synthesize_gains<T: Real>(
    g: &GainInputs<'_, T>,
    sigma_bar: T,
) -> Result<(SmcParams<T>, GainReport<T>)> {
    let r = gain_report(g)?;
    let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
    if !r.torque_feasible {
        return Err(Error::InfeasibleTorque {
            tau_bar: f(g.tau_bar),
            required: f(r.tau_required),
        });
    }
    if !r.margin_valid() {
        return Err(Error::InvalidMargin {
            k: f(r.k),
            lo: f(r.k_lo),
            hi: f(r.k_hi),
        });
    }
    Ok((SmcParams::new(g.lambda, r.gamma, sigma_bar)?, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p() -> SmcParams<f64> {
        SmcParams::new(0.01, 2e-4, 5e-4).unwrap()
    }

    #[test]
    fn tracking_error_cases() {
        let q = Quaternion::from_f64([0.2, 0.4, -0.1, 0.8]).unwrap();
        let w = Vec3::new(1e-3, -2e-3, 5e-4);
        let te = tracking_error(&q, &w, &q, &w, 0.01);
        assert!(te.sigma.norm() < 1e-18 && te.e_eps.norm() < 1e-15);
        let te = tracking_error(&q, &w, &q, &Vec3::zero(), 0.01);
        assert!((te.sigma - w).norm() < 1e-18);
        // on the manifold: e_ω = −λ e_ε
        let qs = Quaternion::from_f64([0.25, 0.35, -0.1, 0.8]).unwrap();
        let e = q.error_from(&qs).eps();
        let te = tracking_error(&q, &(e * -0.01), &qs, &Vec3::zero(), 0.01);
        assert!(te.sigma.norm() < 1e-18);
    }

    #[test]
    fn sat_cases() {
        let s = p().s();
        assert_eq!(sat(&Vec3::zero(), s), Vec3::zero());
        assert_eq!(sat(&Vec3::new(s, -s, 0.0), s), Vec3::new(1.0, -1.0, 0.0));
        let r = sat(&Vec3::new(2.0 * s, -s / 2.0, 0.0), s);
        assert_relative_eq!(r.x, 1.0);
        assert_relative_eq!(r.y, -0.5, epsilon = 1e-15);
        assert_eq!(r.z, 0.0);
    }

    #[test]
    fn deep_sliding_torque() {
        let i = Mat3::from_f64([[30.0, -3.0, 0.0], [-3.0, 30.0, -2.0], [0.0, -2.0, 40.0]]);
        let te = TrackingError {
            e_omega: Vec3::splat(1.0),
            e_eps: Vec3::zero(),
            e_eta: 1.0,
            sigma: Vec3::new(1.0, -1.0, 1.0),
        };
        let (u, tau) = control_input(&te, &p(), &i);
        assert_relative_eq!(u.norm(), 2e-4 * 3f64.sqrt(), max_relative = 1e-15);
        assert!(tau.norm() <= i.norm2() * u.norm());
        let zero = TrackingError {
            sigma: Vec3::zero(),
            ..te
        };
        assert_eq!(control_input(&zero, &p(), &i).1, Vec3::zero());
    }

    #[test]
    fn accuracy() {
        assert_relative_eq!(accuracy_bound(&p()), 0.05, epsilon = 1e-15);
        assert!(SmcParams::new(0.01, 2e-4, 0.01).is_err());
    }

    #[test]
    fn gain_formula_specialization() {
        let i = Mat3::from_f64([[30.0, 0.0, 0.0], [0.0, 35.0, 0.0], [0.0, 0.0, 40.0]]);
        let im = InertiaModel::exact(i).unwrap();
        let g = GainInputs {
            inertia: &im,
            omega_bar: 1e-3,
            h_bar: 0.2,
            tau_bar: 1.0,
            d_bar: 0.0,
            lambda: 1e-9,
            k: 1.5,
            eps_e_bar: 0.01,
            eps_floor: Some(0.13),
        };
        let r = gain_report(&g).unwrap();
        let ps = psi(0.01, Some(0.13));
        assert_eq!(psi(0.01, None), ps - 1.13 / 0.13);
        let expect = 1.5 * (1e-3 * 0.2 / 30.0 + ps * 1e-6);
        assert_relative_eq!(r.gamma, expect, max_relative = 1e-6);
        assert!(r.torque_feasible && r.margin_valid());
        // at the upper end of the interval γ sits on the ceiling
        let top = gain_report(&GainInputs { k: r.k_hi, ..g }).unwrap();
        assert_relative_eq!(top.gamma, top.gamma_ceiling, max_relative = 1e-12);
        let (sp, _) = synthesize_gains(&g, 5e-10).unwrap();
        assert_relative_eq!(sp.gamma, r.gamma);
        assert!(matches!(
            synthesize_gains(&GainInputs { k: 0.9, ..g }, 5e-10),
            Err(Error::InvalidMargin { .. })
        ));
        assert!(matches!(
            synthesize_gains(&GainInputs { tau_bar: 1e-9, ..g }, 5e-10),
            Err(Error::InfeasibleTorque { .. })
        ));
    }
}
