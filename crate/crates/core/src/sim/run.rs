//! Multi-rate closed loop: plant and wheels every step, sliding-mode control every
//! `smc_every` steps, potential-field guidance every `apf_every` steps, all inputs held between
//! updates.

use super::config::{ConfigError, ScenarioConfig};
use super::scenario::Scenario;
use crate::apf::{
    pointing_margins, propagate_reference, reference_rate, theta_hat, GuidanceState,
};
use crate::error::Error;
use crate::math::{norm4, norm_inf4, Vec3, Vec4};
use crate::rigid_body::{rk4_step, PlantInputs, PlantState};
use crate::rw_cluster::{wheel_step, WheelState};
use crate::smc::{accuracy_bound, control_input, tracking_error};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("run fault at t = {t:.2} s: {source}")]
    Fault { t: f64, source: Error },
}

impl SimError {
    /// Faults happen during integration; everything else is rejected input.
    pub fn is_fault(&self) -> bool {
        matches!(self, SimError::Fault { .. })
    }
}

/// One telemetry sample. Actuator fields hold the values applied over `[t, t + dt)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub t: f64,
    pub q: [f64; 4],
    pub omega: [f64; 3],
    pub q_star: [f64; 4],
    pub omega_star: [f64; 3],
    pub sigma: [f64; 3],
    /// Vector part of `q*⁻¹ ⊗ q`.
    pub e_eps: [f64; 3],
    /// Vector part of `q_d⁻¹ ⊗ q`.
    pub e_goal: [f64; 3],
    pub u: [f64; 3],
    /// Body torque delivered by the wheels.
    pub tau: [f64; 3],
    pub tau_w_cmd: Vec4<f64>,
    pub tau_w: Vec4<f64>,
    pub h_w: Vec4<f64>,
    /// Boresight angle to every zone axis, rad.
    pub theta: Vec<f64>,
    pub torque_saturated: bool,
    pub momentum_saturated: bool,
    pub sigma_outside: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TelemetryLog {
    pub zone_count: usize,
    pub records: Vec<Record>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub duration: f64,
    /// Closest approach to every zone axis, deg.
    pub min_theta_deg: Vec<f64>,
    /// `min_t min_j (θ_j − θ̲_j)`, deg; negative means a cone was entered.
    pub min_margin_deg: f64,
    pub violation_depth_deg: f64,
    /// `min_t min_j (θ_j − θ̂_j)`, deg, with `θ̂_j` the guaranteed clearance given where the
    /// other zones are at that instant.
    pub min_hat_margin_deg: f64,
    pub max_tau_w_cmd: f64,
    pub max_tau_w: f64,
    pub max_h_w: f64,
    pub max_tau_cmd_norm: f64,
    /// Controller steps asking for more than the inscribed torque radius.
    pub tau_cmd_over_envelope: usize,
    pub torque_saturated_steps: usize,
    pub momentum_saturated_steps: usize,
    pub max_omega_star: f64,
    pub omega_star_over_bound: bool,
    pub reaching_time: Option<f64>,
    pub max_sigma_after_reach: f64,
    /// First time after which `‖e_ε‖ ≤ σ̄/λ` for the rest of the run.
    pub settling_time: Option<f64>,
    /// Largest `|e_ε,i|` over the last tenth of the run.
    pub steady_tracking_error: f64,
    /// Largest `|ε_i|` of `q_d⁻¹ ⊗ q` over the last tenth of the run.
    pub steady_goal_error: f64,
    pub final_q: [f64; 4],
    pub final_error_deg: f64,
    /// Largest drift of the boresight from the cone it sweeps under a pure eigenaxis slew, deg.
    pub eigenaxis_deviation_deg: f64,
    /// Largest distance of the boresight from the plane through its start and goal, deg.
    pub great_circle_deviation_deg: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub log: TelemetryLog,
    pub metrics: Metrics,
}

/// Parses nothing, builds the scenario and runs it.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput, SimError> {
    let sc = Scenario::build(cfg)?;
    run_built(&sc)
}

struct Tracker {
    min_theta: Vec<f64>,
    min_margin: f64,
    min_hat_margin: f64,
    max_tau_w_cmd: f64,
    max_tau_w: f64,
    max_h_w: f64,
    max_tau_cmd_norm: f64,
    tau_cmd_over: usize,
    torque_sat: usize,
    momentum_sat: usize,
    max_omega_star: f64,
    reaching: Option<f64>,
    max_sigma_after: f64,
    last_unsettled: Option<f64>,
    steady_track: f64,
    steady_goal: f64,
    steady_goal_norm: f64,
    eig_dev: f64,
    gc_dev: f64,
}

fn arr3(v: Vec3<f64>) -> [f64; 3] {
    v.to_array()
}

fn fault(t: f64) -> impl Fn(Error) -> SimError {
    move |source| SimError::Fault { t, source }
}

/// Runs a built scenario to completion.
pub fn run_built(sc: &Scenario) -> Result<RunOutput, SimError> {
    let dt = sc.dt;
    let n_z = sc.zones.len();
    let i_star = *sc.inertia.nominal();
    let sigma_bar = sc.smc.sigma_bar;
    let e_bound = accuracy_bound(&sc.smc);
    let tau_bar = sc.envelope.tau_bar;
    let steady_from = sc.steps - sc.steps / 10;

    // eigenaxis of the initial error and the boresight's ideal sweep
    let m_i0 = sc.q0.to_inertial(&sc.boresight);
    let e0 = sc.q0.error_from(&sc.q_d).eps();
    let axis_i = e0.try_normalize().map(|a| sc.q_d.to_inertial(&a));
    let cone0 = axis_i.map(|a| m_i0.angle_to(&a));
    let m_goal = sc.q_d.to_inertial(&sc.boresight);
    let gc_normal = m_i0.cross(&m_goal).try_normalize();

    let mut state = PlantState {
        q: sc.q0,
        omega: sc.omega0,
        t: 0.0,
    };
    let mut wheels = WheelState::zero();
    let mut guide = GuidanceState::start(sc.q0);
    let mut u = Vec3::zero();
    let mut tau_w_cmd: Vec4<f64> = [0.0; 4];
    let mut tau_w: Vec4<f64> = [0.0; 4];
    let mut flags_t = false;
    let mut flags_m = false;

    let mut tr = Tracker {
        min_theta: vec![f64::INFINITY; n_z],
        min_margin: f64::INFINITY,
        min_hat_margin: f64::INFINITY,
        max_tau_w_cmd: 0.0,
        max_tau_w: 0.0,
        max_h_w: 0.0,
        max_tau_cmd_norm: 0.0,
        tau_cmd_over: 0,
        torque_sat: 0,
        momentum_sat: 0,
        max_omega_star: 0.0,
        reaching: None,
        max_sigma_after: 0.0,
        last_unsettled: None,
        steady_track: 0.0,
        steady_goal: 0.0,
        steady_goal_norm: 0.0,
        eig_dev: 0.0,
        gc_dev: 0.0,
    };
    let mut log = TelemetryLog {
        zone_count: n_z,
        records: Vec::with_capacity(sc.steps / sc.stride + 2),
    };

    let mut thetas = Vec::with_capacity(n_z);
    for k in 0..=sc.steps {
        let t = k as f64 * dt;
        let last = k == sc.steps;
        if !last {
            if k % sc.apf_every == 0 {
                let w = reference_rate(&state.q, &sc.q_d, &sc.boresight, &sc.zones, &sc.apf)
                    .map_err(fault(t))?;
                guide.omega_star = w;
            }
            if k % sc.smc_every == 0 {
                let te = tracking_error(
                    &state.q,
                    &state.omega,
                    &guide.q_star,
                    &guide.omega_star,
                    sc.smc.lambda,
                );
                let (uu, tau_cmd) = control_input(&te, &sc.smc, &i_star);
                u = uu;
                tau_w_cmd = sc.cluster.allocate(&tau_cmd);
                let n = tau_cmd.norm();
                tr.max_tau_cmd_norm = tr.max_tau_cmd_norm.max(n);
                if n > tau_bar {
                    tr.tau_cmd_over += 1;
                }
            }
        }

        // observations at t
        let te = tracking_error(
            &state.q,
            &state.omega,
            &guide.q_star,
            &guide.omega_star,
            sc.smc.lambda,
        );
        let e_goal = state.q.error_from(&sc.q_d);
        let margins = pointing_margins(&state.q, &sc.boresight, &sc.zones);
        for (j, m) in margins.iter().enumerate() {
            tr.min_theta[j] = tr.min_theta[j].min(m.theta);
            tr.min_margin = tr.min_margin.min(m.theta - sc.zones[j].theta_floor());
        }
        if n_z > 1 {
            thetas.clear();
            thetas.extend(margins.iter().map(|m| m.theta));
            for (j, z) in sc.zones.iter().enumerate() {
                let hat = theta_hat(&thetas, z.theta_floor(), j);
                tr.min_hat_margin = tr.min_hat_margin.min(thetas[j] - hat);
            }
        } else if n_z == 1 {
            tr.min_hat_margin = tr.min_margin;
        }
        let s_norm = te.sigma.norm();
        if tr.reaching.is_none() && s_norm <= sigma_bar {
            tr.reaching = Some(t);
        }
        if tr.reaching.is_some() {
            tr.max_sigma_after = tr.max_sigma_after.max(s_norm);
        }
        if te.e_eps.norm() > e_bound {
            tr.last_unsettled = Some(t);
        }
        if k >= steady_from {
            tr.steady_track = tr.steady_track.max(te.e_eps.norm_inf());
            tr.steady_goal = tr.steady_goal.max(e_goal.eps().norm_inf());
            tr.steady_goal_norm = tr.steady_goal_norm.max(e_goal.eps().norm());
        }
        tr.max_omega_star = tr.max_omega_star.max(guide.omega_star.norm());
        let m_i = state.q.to_inertial(&sc.boresight);
        if let (Some(a), Some(c0)) = (axis_i, cone0) {
            tr.eig_dev = tr.eig_dev.max((m_i.angle_to(&a) - c0).abs());
        }
        if let Some(p) = gc_normal {
            tr.gc_dev = tr.gc_dev.max(m_i.dot(&p).clamp(-1.0, 1.0).asin().abs());
        }

        let mut next_wheels = wheels;
        if !last {
            let (nw, tw, fl) = wheel_step(&wheels, &tau_w_cmd, dt, &sc.cluster, &sc.filter);
            next_wheels = nw;
            tau_w = tw;
            flags_t = fl.torque.iter().any(|&f| f);
            flags_m = fl.momentum.iter().any(|&f| f);
            tr.torque_sat += usize::from(flags_t);
            tr.momentum_sat += usize::from(flags_m);
            tr.max_tau_w_cmd = tr.max_tau_w_cmd.max(norm_inf4(&tau_w_cmd));
            tr.max_tau_w = tr.max_tau_w.max(norm_inf4(&tau_w));
        }
        tr.max_h_w = tr.max_h_w.max(norm_inf4(&wheels.h_w));
        let tau_body = sc.cluster.wheels_to_body(&tau_w);

        if k % sc.stride == 0 || last {
            log.records.push(Record {
                t,
                q: state.q.to_array(),
                omega: arr3(state.omega),
                q_star: guide.q_star.to_array(),
                omega_star: arr3(guide.omega_star),
                sigma: arr3(te.sigma),
                e_eps: arr3(te.e_eps),
                e_goal: arr3(e_goal.eps()),
                u: arr3(u),
                tau: arr3(tau_body),
                tau_w_cmd,
                tau_w,
                h_w: wheels.h_w,
                theta: margins.iter().map(|m| m.theta).collect(),
                torque_saturated: flags_t,
                momentum_saturated: flags_m,
                sigma_outside: s_norm > sigma_bar,
            });
        }
        if last {
            break;
        }

        let inputs = PlantInputs {
            tau: tau_body,
            h: sc.cluster.wheels_to_body(&wheels.h_w),
            d: sc.disturbance.at(t),
        };
        state = rk4_step(&state, dt, &inputs, &sc.inertia);
        state.t = (k + 1) as f64 * dt;
        if !state.omega.is_finite() || !norm4(&state.q.to_array()).is_finite() {
            return Err(SimError::Fault {
                t: state.t,
                source: Error::InvalidParameter("state diverged".into()),
            });
        }
        guide = propagate_reference(&guide, &guide.omega_star, dt);
        wheels = next_wheels;
    }

    let final_err = state.q.error_from(&sc.q_d);
    let final_error_deg =
        (2.0 * final_err.eps().norm().atan2(final_err.eta().abs())).to_degrees();
    let duration = sc.steps as f64 * dt;
    let metrics = Metrics {
        duration,
        min_theta_deg: tr.min_theta.iter().map(|t| t.to_degrees()).collect(),
        min_margin_deg: if n_z == 0 {
            f64::INFINITY
        } else {
            tr.min_margin.to_degrees()
        },
        violation_depth_deg: if n_z == 0 {
            0.0
        } else {
            (-tr.min_margin.to_degrees()).max(0.0)
        },
        min_hat_margin_deg: tr.min_hat_margin.to_degrees(),
        max_tau_w_cmd: tr.max_tau_w_cmd,
        max_tau_w: tr.max_tau_w,
        max_h_w: tr.max_h_w,
        max_tau_cmd_norm: tr.max_tau_cmd_norm,
        tau_cmd_over_envelope: tr.tau_cmd_over,
        torque_saturated_steps: tr.torque_sat,
        momentum_saturated_steps: tr.momentum_sat,
        max_omega_star: tr.max_omega_star,
        omega_star_over_bound: tr.max_omega_star > sc.envelope.omega_bar,
        reaching_time: tr.reaching,
        max_sigma_after_reach: tr.max_sigma_after,
        settling_time: match tr.last_unsettled {
            None => Some(0.0),
            Some(t) if t < duration => Some(t + dt),
            Some(_) => None,
        },
        steady_tracking_error: tr.steady_track,
        steady_goal_error: tr.steady_goal,
        final_q: state.q.to_array(),
        final_error_deg,
        eigenaxis_deviation_deg: tr.eig_dev.to_degrees(),
        great_circle_deviation_deg: tr.gc_dev.to_degrees(),
        converged: tr.steady_goal_norm <= e_bound,
    };
    Ok(RunOutput { log, metrics })
}

impl Metrics {
    /// Whether the final attitude is the `η < 0` representative of the goal.
    pub fn final_eta(&self) -> f64 {
        self.final_q[0]
    }
}

