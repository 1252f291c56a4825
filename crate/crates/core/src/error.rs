use thiserror::Error;

/// Faults raised by the attitude algebra, actuator analysis, guidance and control.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quaternion components cannot be normalized (zero or non-finite norm)")]
    DegenerateQuaternion,
    #[error("boresight and forbidden axis are antiparallel; shortest rotation is undefined")]
    AntiparallelAxes,
    #[error("inertia perturbation corner makes I + I*^-1 Delta singular")]
    SingularPerturbation,
    #[error("invalid inertia model: {0}")]
    InvalidInertia(String),
    #[error("degenerate wheel geometry: {0}")]
    DegenerateGeometry(String),
    #[error("wheel momentum envelope {h_bar} N m s does not exceed disturbance momentum {h_d} N m s")]
    InfeasibleActuation { h_bar: f64, h_d: f64 },
    #[error("boresight lies on the axis of zone {} (|eps_tilde| = {eps_norm:e})", zone + 1)]
    /// `zone` is the 0-based index.
    BoresightOnForbiddenAxis { zone: usize, eps_norm: f64 },
    #[error("zone spacing infeasible: sqrt(N) sin(theta/2) = {0} > 1")]
    InfeasibleSpacing(f64),
    #[error("torque capability {tau_bar:e} N m below required {required:e} N m")]
    InfeasibleTorque { tau_bar: f64, required: f64 },
    #[error("margin factor k = {k} outside admissible interval ({lo}, {hi})")]
    InvalidMargin { k: f64, lo: f64, hi: f64 },
    #[error("could not draw an SPD inertia sample in {0} tries")]
    RejectionExhausted(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
