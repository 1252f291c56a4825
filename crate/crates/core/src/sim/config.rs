//! Scenario description: TOML schema, the shipped default profile and dotted-key overrides.

use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

/// The reference scenario, used when no file is given.
pub const DEFAULT_PROFILE: &str = include_str!("default.toml");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("malformed scenario: {0}")]
    Parse(String),
    #[error("override `{key}`: {reason}")]
    Override { key: String, reason: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    /// s.
    pub duration: f64,
    /// Accept an initial attitude whose boresight starts inside a keep-out cone.
    #[serde(default)]
    pub allow_initial_violation: bool,
    pub inertia: InertiaConfig,
    pub wheels: WheelConfig,
    pub disturbance: DisturbanceConfig,
    pub attitude: AttitudeConfig,
    pub controller: ControllerConfig,
    #[serde(default)]
    pub guidance: GuidanceConfig,
    pub timing: TimingConfig,
    #[serde(default)]
    pub telemetry: TelemetryConfig,
    #[serde(default)]
    pub zones: Vec<ZoneConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InertiaConfig {
    /// kg m².
    pub nominal: [[f64; 3]; 3],
    /// Elementwise bound as a fraction of `|I*|`.
    pub uncertainty: f64,
    /// True inertia; the nominal one when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actual: Option<[[f64; 3]; 3]>,
    /// Draw the true inertia from the uncertainty box with `seed` (ignored if `actual` is set).
    #[serde(default)]
    pub sample_actual: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WheelConfig {
    pub alpha_deg: f64,
    pub beta_deg: f64,
    /// N m.
    pub tau_max: f64,
    /// N m s.
    pub h_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceConfig {
    pub bias: [f64; 3],
    pub amplitude: [f64; 3],
    /// rad/s.
    pub frequency: f64,
    /// rad.
    #[serde(default)]
    pub phase: f64,
    pub d_bar: f64,
    pub d1_bar: f64,
    pub d2_bar: f64,
    /// Orbital period, s.
    pub period: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttitudeConfig {
    pub q0: [f64; 4],
    pub omega0: [f64; 3],
    pub q_d: [f64; 4],
    /// Instrument axis in body coordinates.
    pub boresight: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    pub lambda: f64,
    pub k: f64,
    pub sigma_bar: f64,
    /// Switching gain; synthesized from the margin `k` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuidanceConfig {
    /// Rate ceiling; derived from the momentum envelope when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_bar: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingConfig {
    pub plant_dt: f64,
    pub smc_period: f64,
    pub apf_period: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TelemetryConfig {
    /// Record every n-th plant step (the final step is always kept).
    pub stride: usize,
}

impl Default for TelemetryConfig {
    fn default() -> Self {
        Self { stride: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoneConfig {
    /// Inertial direction of the bright object.
    pub axis: [f64; 3],
    pub theta_deg: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::from_toml_str(DEFAULT_PROFILE, &[]).expect("shipped profile parses")
    }
}

impl ScenarioConfig {
    /// Parses a scenario and applies `key.path=value` overrides before schema validation.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        for ov in overrides {
            apply_override(&mut table, ov)?;
        }
        serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
            let path = e.path().to_string();
            let msg = e.inner().message().trim().to_string();
            ConfigError::Parse(if path == "." { msg } else { format!("{path}: {msg}") })
        })
    }

    /// `default` selects the shipped profile; anything else is a file path.
    pub fn load(source: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        if source == "default" {
            return Self::from_toml_str(DEFAULT_PROFILE, overrides);
        }
        let text = std::fs::read_to_string(Path::new(source)).map_err(|e| ConfigError::Io {
            path: source.to_string(),
            reason: e.to_string(),
        })?;
        Self::from_toml_str(&text, overrides)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Returns a copy with the overrides applied.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self, ConfigError> {
        Self::from_toml_str(&self.to_toml_string(), overrides)
    }
}

/// Sets `a.b.c = value` inside `table`. The value is read as a TOML literal, falling back to a
/// bare string. Intermediate tables must already exist so typos surface as errors.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), ConfigError> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| ConfigError::Override {
        key: spec.to_string(),
        reason: "expected key=value".into(),
    })?;
    let key = key.trim();
    let raw = raw.trim();
    let path: Vec<&str> = key.split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::Override {
            key: key.to_string(),
            reason: "empty path segment".into(),
        });
    }
    let value = parse_literal(raw);
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut cur = table;
    for (depth, seg) in parents.iter().enumerate() {
        let prefix = path[..=depth].join(".");
        cur = match cur.get_mut(*seg) {
            Some(toml::Value::Table(t)) => t,
            Some(_) => {
                return Err(ConfigError::Override {
                    key: key.to_string(),
                    reason: format!("`{prefix}` is not a table"),
                })
            }
            None => {
                return Err(ConfigError::Override {
                    key: key.to_string(),
                    reason: format!("unknown key `{prefix}`"),
                })
            }
        };
    }
    cur.insert((*last).to_string(), value);
    Ok(())
}

fn parse_literal(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}
