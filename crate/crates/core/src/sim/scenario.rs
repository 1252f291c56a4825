//! Turns a [`ScenarioConfig`] into validated models, gains and a step schedule.

use super::config::{ConfigError, ScenarioConfig};
use crate::apf::{apf_params, pointing_margins, ApfParams, ForbiddenZone};
use crate::error::{Error, Result};
use crate::math::{Mat3, Quaternion, Vec3};
use crate::rigid_body::{DisturbanceModel, InertiaModel};
use crate::rw_cluster::{omega_max, EnvelopeKind, RwCluster, WheelFilter};
use crate::smc::{gain_report, GainInputs, GainReport, SmcParams};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Attempts allowed when drawing an SPD inertia from the uncertainty box.
pub const INERTIA_DRAWS: usize = 100;

/// Actuator capability derived from the wheel cluster and the disturbance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    /// Inscribed momentum radius, N m s.
    pub h_bar: f64,
    /// Inscribed torque radius, N m.
    pub tau_bar: f64,
    /// Quarter-orbit disturbance momentum, N m s.
    pub h_d: f64,
    /// Rate ceiling from the envelope, rad/s.
    pub omega_bar_derived: f64,
    /// Rate ceiling actually used by guidance, rad/s.
    pub omega_bar: f64,
}

/// A fully built scenario, ready to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub cfg: ScenarioConfig,
    pub inertia: InertiaModel<f64>,
    pub cluster: RwCluster<f64>,
    pub filter: WheelFilter<f64>,
    pub disturbance: DisturbanceModel<f64>,
    pub zones: Vec<ForbiddenZone<f64>>,
    pub envelope: Envelope,
    pub apf: ApfParams<f64>,
    pub smc: SmcParams<f64>,
    /// Gain synthesis diagnostics, evaluated even when `gamma` is given explicitly.
    pub gains: GainReport<f64>,
    pub q0: Quaternion<f64>,
    pub omega0: Vec3<f64>,
    pub q_d: Quaternion<f64>,
    pub boresight: Vec3<f64>,
    pub dt: f64,
    pub smc_every: usize,
    pub apf_every: usize,
    pub steps: usize,
    pub stride: usize,
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

fn model(e: Error) -> ConfigError {
    ConfigError::Invalid(e.to_string())
}

fn ticks(period: f64, dt: f64, what: &str) -> Result<usize, ConfigError> {
    let n = (period / dt).round();
    if !(period > 0.0) || n < 1.0 || (n * dt - period).abs() > 1e-9 * period.max(1.0) {
        return Err(invalid(format!(
            "{what} ({period} s) must be a positive integer multiple of plant_dt ({dt} s)"
        )));
    }
    Ok(n as usize)
}

/// Symmetric inertia drawn uniformly in `nominal ± bound` (six independent entries), retried
/// until positive definite.
pub fn sample_inertia<R: Rng>(nominal: &Mat3<f64>, bound: &Mat3<f64>, rng: &mut R) -> Result<Mat3<f64>> {
    for _ in 0..INERTIA_DRAWS {
        let mut m = *nominal;
        for i in 0..3 {
            for j in i..3 {
                let b = bound[(i, j)];
                let d = if b > 0.0 { rng.gen_range(-b..=b) } else { 0.0 };
                m[(i, j)] = nominal[(i, j)] + d;
                m[(j, i)] = m[(i, j)];
            }
        }
        if m.is_spd(1e-12) {
            return Ok(m);
        }
    }
    Err(Error::RejectionExhausted(INERTIA_DRAWS))
}

impl Scenario {
    pub fn build(cfg: &ScenarioConfig) -> Result<Self, ConfigError> {
        let t = &cfg.timing;
        if !(t.plant_dt > 0.0 && t.plant_dt.is_finite()) {
            return Err(invalid("plant_dt must be positive"));
        }
        if !(cfg.duration > 0.0 && cfg.duration.is_finite()) {
            return Err(invalid("duration must be positive"));
        }
        if cfg.telemetry.stride == 0 {
            return Err(invalid("telemetry.stride must be at least 1"));
        }
        let dt = t.plant_dt;
        let smc_every = ticks(t.smc_period, dt, "smc_period")?;
        let apf_every = ticks(t.apf_period, dt, "apf_period")?;
        let steps = (cfg.duration / dt).round() as usize;
        if steps == 0 {
            return Err(invalid("duration shorter than one plant step"));
        }

        let ic = &cfg.inertia;
        if !(0.0..1.0).contains(&ic.uncertainty) {
            return Err(invalid("inertia.uncertainty must lie in [0, 1)"));
        }
        let nominal = Mat3::from_rows(ic.nominal);
        let bound = nominal.abs().scale(ic.uncertainty);
        let actual = match (ic.actual, ic.sample_actual) {
            (Some(a), _) => Mat3::from_rows(a),
            (None, true) => {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                sample_inertia(&nominal, &bound, &mut rng).map_err(model)?
            }
            (None, false) => nominal,
        };
        let inertia = InertiaModel::new(nominal, bound, actual).map_err(model)?;

        let w = &cfg.wheels;
        let cluster = RwCluster::new(
            w.alpha_deg.to_radians(),
            w.beta_deg.to_radians(),
            w.tau_max,
            w.h_max,
        )
        .map_err(model)?;
        let h_bar = cluster
            .envelope_radius(EnvelopeKind::Momentum)
            .map_err(model)?;
        let tau_bar = cluster
            .envelope_radius(EnvelopeKind::Torque)
            .map_err(model)?;

        let d = &cfg.disturbance;
        let disturbance = DisturbanceModel {
            bias: Vec3::from(d.bias),
            amp: Vec3::from(d.amplitude),
            freq: d.frequency,
            phase: d.phase,
            d_bar: d.d_bar,
            d1_bar: d.d1_bar,
            d2_bar: d.d2_bar,
            period: d.period,
        };
        if !(d.d_bar >= 0.0 && d.d1_bar >= 0.0 && d.d2_bar >= 0.0 && d.period >= 0.0) {
            return Err(invalid("disturbance bounds and period must be non-negative"));
        }
        let omega_bar_derived = omega_max(h_bar, &disturbance, &inertia).map_err(model)?;
        let omega_bar = cfg.guidance.omega_bar.unwrap_or(omega_bar_derived);
        let envelope = Envelope {
            h_bar,
            tau_bar,
            h_d: disturbance.momentum_bound(),
            omega_bar_derived,
            omega_bar,
        };

        let zones = cfg
            .zones
            .iter()
            .map(|z| ForbiddenZone::new(Vec3::from(z.axis), z.theta_deg.to_radians()))
            .collect::<Result<Vec<_>>>()
            .map_err(model)?;
        let apf = apf_params(omega_bar, tau_bar, &inertia, &zones).map_err(model)?;

        let c = &cfg.controller;
        let eps_floor = zones
            .iter()
            .map(|z| z.eps_floor())
            .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.min(e))));
        let inputs = GainInputs {
            inertia: &inertia,
            omega_bar,
            h_bar,
            tau_bar,
            d_bar: d.d_bar,
            lambda: c.lambda,
            k: c.k,
            eps_e_bar: apf.eps_e_bar,
            eps_floor,
        };
        let smc = match c.gamma {
            Some(g) => SmcParams::new(c.lambda, g, c.sigma_bar).map_err(model)?,
            None => {
                crate::smc::synthesize_gains(&inputs, c.sigma_bar)
                    .map_err(model)?
                    .0
            }
        };
        let gains = gain_report(&inputs).map_err(model)?;

        let a = &cfg.attitude;
        let q0 = Quaternion::from_array(a.q0).map_err(model)?;
        let q_d = Quaternion::from_array(a.q_d).map_err(model)?;
        let boresight = Vec3::from(a.boresight)
            .try_normalize()
            .ok_or_else(|| invalid("boresight has zero length"))?;
        let omega0 = Vec3::from(a.omega0);
        if !omega0.is_finite() {
            return Err(invalid("omega0 must be finite"));
        }
        if !cfg.allow_initial_violation {
            for (j, m) in pointing_margins(&q0, &boresight, &zones).iter().enumerate() {
                if m.violated {
                    return Err(invalid(format!(
                        "initial boresight is {:.3} deg from zone {} axis, inside its {:.3} deg cone",
                        m.theta.to_degrees(),
                        j + 1,
                        zones[j].theta_floor().to_degrees()
                    )));
                }
            }
        }

        Ok(Self {
            cfg: cfg.clone(),
            inertia,
            cluster,
            filter: WheelFilter::bilinear(dt),
            disturbance,
            zones,
            envelope,
            apf,
            smc,
            gains,
            q0,
            omega0,
            q_d,
            boresight,
            dt,
            smc_every,
            apf_every,
            steps,
            stride: cfg.telemetry.stride,
        })
    }
}
