use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::controller::{self, ControllerMode};
use crate::diffdrive::DriveGeometry;
use crate::dynamics::{polar_from_cartesian, TargetPosition};
use crate::error::{GeometryError, Result};
use crate::params::{validate_radii, DeltaChoice, DesignParams, RadiiTriple};
use crate::sim::{InitialCondition, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiiSection {
    pub r_d: f64,
    pub r_a: f64,
    pub r_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaKeyword {
    Auto,
}

/// Either a number or the string `"auto"` (0.9 of the admissible bound).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeltaSetting {
    Value(f64),
    Keyword(DeltaKeyword),
}

impl From<DeltaSetting> for DeltaChoice {
    fn from(d: DeltaSetting) -> Self {
        match d {
            DeltaSetting::Value(v) => DeltaChoice::Fixed(v),
            DeltaSetting::Keyword(DeltaKeyword::Auto) => DeltaChoice::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsSection {
    pub delta: DeltaSetting,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub x: f64,
    pub y: f64,
    /// Degrees; converted once when the config is resolved.
    pub theta0_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSection {
    pub dt: f64,
    pub t_final: f64,
    pub record_stride: usize,
}

/// The JSON run configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub radii: RadiiSection,
    pub speed: f64,
    pub gains: GainsSection,
    pub kappa: f64,
    pub controller_mode: ControllerMode,
    pub initial: InitialSection,
    pub target: TargetSection,
    pub integration: IntegrationSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveGeometry>,
    #[serde(default)]
    pub allow_outside_theta: bool,
    #[serde(default)]
    pub initial_range_rate: f64,
}

impl RunConfigFile {
    /// Reference setup: radii (1, 0.7, 0.4), V = 0.6, δ = 0.5, κ = 0.05,
    /// start (1, 0.8) at 38° bearing, target at the origin.
    pub fn reference() -> Self {
        Self {
            radii: RadiiSection {
                r_d: 1.0,
                r_a: 0.7,
                r_s: 0.4,
            },
            speed: 0.6,
            gains: GainsSection {
                delta: DeltaSetting::Value(0.5),
            },
            kappa: 0.05,
            controller_mode: ControllerMode::BlfState,
            initial: InitialSection {
                x: 1.0,
                y: 0.8,
                theta0_deg: 38.0,
            },
            target: TargetSection { x: 0.0, y: 0.0 },
            integration: IntegrationSection {
                dt: 1e-3,
                t_final: 120.0,
                record_stride: 10,
            },
            drive: Some(DriveGeometry::default()),
            allow_outside_theta: false,
            initial_range_rate: 0.0,
        }
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn from_path(path: &Path) -> std::result::Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::from_json(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn radii(&self) -> std::result::Result<RadiiTriple, GeometryError> {
        validate_radii(self.radii.r_d, self.radii.r_a, self.radii.r_s)
    }

    pub fn design_params(&self) -> Result<DesignParams> {
        DesignParams::new(self.radii()?, self.speed, self.gains.delta.into(), self.kappa)
    }

    pub fn target(&self) -> TargetPosition {
        TargetPosition {
            x: self.target.x,
            y: self.target.y,
        }
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let params = self.design_params()?;
        Ok(SimConfig {
            initial: InitialCondition {
                x: self.initial.x,
                y: self.initial.y,
                theta0: self.initial.theta0_deg.to_radians(),
            },
            target: self.target(),
            params,
            mode: self.controller_mode,
            dt: self.integration.dt,
            t_final: self.integration.t_final,
            record_stride: self.integration.record_stride,
            allow_outside_theta: self.allow_outside_theta,
            initial_range_rate: self.initial_range_rate,
        })
    }

    /// `η` at the configured start.
    pub fn initial_eta(&self, params: &DesignParams) -> Result<f64> {
        let sim = self.sim_config()?;
        let polar = polar_from_cartesian(&sim.initial_pose()?, &sim.target)?;
        controller::eta(polar.r, polar.theta, params)
    }

    /// `W(η(0))`, absent when the start has no barrier value.
    pub fn initial_w0(&self, params: &DesignParams) -> Option<f64> {
        self.initial_eta(params)
            .ok()
            .and_then(|e| controller::blf_value(e, params.delta).ok())
    }

    pub fn drive_or_default(&self) -> DriveGeometry {
        self.drive.unwrap_or_default()
    }
}
