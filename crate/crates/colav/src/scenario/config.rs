//! Scenario file schema, validation, and the bundled fixtures.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::colregs::Thresholds;
use crate::control::ControllerGains;
use crate::dynamics::VesselParams;
use crate::guidance::{GuidanceParams, Route, Waypoint};
use crate::llm::LlmConfig;
use crate::risk::RiskKnees;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scenario JSON: {0}")]
    Parse(String),
    #[error("invalid scenario config: field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("numerical blow-up at control step {step}")]
    NumericalBlowUp { step: u64 },
    #[error("cannot write output {path}: {source}")]
    OutputIo {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("decider setup failed: {0}")]
    Decider(String),
}

impl ScenarioError {
    fn invalid(field: &str, reason: impl Into<String>) -> Self {
        Self::Invalid {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeciderKind {
    Rule,
    Llm,
    Mock,
}

impl std::fmt::Display for DeciderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DeciderKind::Rule => write!(f, "rule"),
            DeciderKind::Llm => write!(f, "llm"),
            DeciderKind::Mock => write!(f, "mock"),
        }
    }
}

/// Target ship motion model. Only constant course and speed is
/// implemented; the enum is the extension point for maneuvering targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TargetMotion {
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetInitial {
    /// North position, m.
    pub x: f64,
    /// East position, m.
    pub y: f64,
    /// Course, degrees clockwise from North.
    pub heading_deg: f64,
    /// Speed, m/s.
    pub speed: f64,
}

/// Full description of one encounter scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub own_route: Vec<Waypoint>,
    /// Commanded cruising speed of the own ship, m/s.
    pub own_speed_cmd: f64,
    pub target_initial: TargetInitial,
    pub target_motion: TargetMotion,
    pub vessel_params: VesselParams,
    pub guidance: GuidanceParams,
    pub gains: ControllerGains,
    pub thresholds: Thresholds,
    pub risk_knees: RiskKnees,
    pub decider: DeciderKind,
    pub llm: LlmConfig,
    /// Fixture file for the mock decider: a JSON array of canned chat
    /// response bodies, served in order.
    pub mock_fixtures: Option<PathBuf>,
    /// Offset subtracted from the relative heading before classification,
    /// degrees. Leave at 0 to classify the relative heading verbatim.
    pub classify_offset_deg: f64,
    pub seed: u64,
    /// Simulated time, s.
    pub duration: f64,
    /// Control/dynamics step, s.
    pub dt_control: f64,
    /// Decision period, s; must be an integer multiple of `dt_control`.
    pub dt_decision: f64,
    /// Run the decider on a worker thread, overlapping query latency with
    /// control stepping. Off by default; deterministic runs need the
    /// synchronous path.
    pub concurrent_decider: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            name: "scenario".to_string(),
            own_route: vec![Waypoint::new(0.0, 0.0), Waypoint::new(4000.0, 0.0)],
            own_speed_cmd: 16.0,
            target_initial: TargetInitial {
                x: 10_000.0,
                y: 10_000.0,
                heading_deg: 0.0,
                speed: 0.0,
            },
            target_motion: TargetMotion::Constant,
            vessel_params: VesselParams::default(),
            guidance: GuidanceParams::default(),
            gains: ControllerGains::default(),
            thresholds: Thresholds::default(),
            risk_knees: RiskKnees::default(),
            decider: DeciderKind::Rule,
            llm: LlmConfig::default(),
            mock_fixtures: None,
            classify_offset_deg: 0.0,
            seed: 0,
            duration: 60.0,
            dt_control: 0.01,
            dt_decision: 1.0,
            concurrent_decider: false,
        }
    }
}

fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

fn non_negative(v: f64) -> bool {
    v.is_finite() && v >= 0.0
}

impl ScenarioConfig {
    /// Parse and validate a scenario from JSON text.
    pub fn from_json_str(text: &str) -> Result<Self, ScenarioError> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Check every config invariant, naming the offending field.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        Route::new(self.own_route.clone())
            .map_err(|e| ScenarioError::invalid("own_route", e.to_string()))?;

        if !self.own_speed_cmd.is_finite() || self.own_speed_cmd < 0.0 {
            return Err(ScenarioError::invalid(
                "own_speed_cmd",
                "must be finite and non-negative",
            ));
        }
        let t = &self.target_initial;
        if ![t.x, t.y, t.heading_deg, t.speed].iter().all(|v| v.is_finite()) {
            return Err(ScenarioError::invalid(
                "target_initial",
                "all fields must be finite",
            ));
        }
        if t.speed < 0.0 {
            return Err(ScenarioError::invalid(
                "target_initial.speed",
                "must be non-negative",
            ));
        }

        self.vessel_params
            .validate()
            .map_err(|e| ScenarioError::invalid("vessel_params", e.to_string()))?;

        if !positive(self.guidance.cte_damping) {
            return Err(ScenarioError::invalid(
                "guidance.cte_damping",
                "must be positive",
            ));
        }
        if !self.guidance.colav_gain.is_finite() || self.guidance.colav_gain < 0.0 {
            return Err(ScenarioError::invalid(
                "guidance.colav_gain",
                "must be finite and non-negative",
            ));
        }
        if !self.guidance.colav_range_knees.is_valid() {
            return Err(ScenarioError::invalid(
                "guidance.colav_range_knees",
                "lower knee must be below upper knee",
            ));
        }
        if !positive(self.guidance.acceptance_radius) {
            return Err(ScenarioError::invalid(
                "guidance.acceptance_radius",
                "must be positive",
            ));
        }

        if !positive(self.gains.kp) {
            return Err(ScenarioError::invalid("gains.kp", "must be positive"));
        }
        if !non_negative(self.gains.kd) {
            return Err(ScenarioError::invalid("gains.kd", "must be non-negative"));
        }

        let th = &self.thresholds;
        if !positive(th.risk) || th.risk > 1.0 {
            return Err(ScenarioError::invalid("thresholds.risk", "must be in (0, 1]"));
        }
        if !(positive(th.range) && positive(th.dcpa) && positive(th.tcpa)) {
            return Err(ScenarioError::invalid(
                "thresholds",
                "range, dcpa, and tcpa must be positive",
            ));
        }
        if !non_negative(th.risk_hysteresis) || th.risk_hysteresis >= th.risk {
            return Err(ScenarioError::invalid(
                "thresholds.risk_hysteresis",
                "must be non-negative and below thresholds.risk",
            ));
        }

        for (name, knees) in [
            ("risk_knees.dcpa", self.risk_knees.dcpa),
            ("risk_knees.tcpa", self.risk_knees.tcpa),
            ("risk_knees.range", self.risk_knees.range),
        ] {
            if !knees.is_valid() {
                return Err(ScenarioError::invalid(
                    name,
                    "lower knee must be below upper knee",
                ));
            }
        }

        match self.decider {
            DeciderKind::Llm => self
                .llm
                .validate()
                .map_err(|e| ScenarioError::invalid("llm", e))?,
            DeciderKind::Mock => {
                if self.mock_fixtures.is_none() {
                    return Err(ScenarioError::invalid(
                        "mock_fixtures",
                        "the mock decider needs a fixture file (or --fixtures)",
                    ));
                }
            }
            DeciderKind::Rule => {}
        }

        if !self.classify_offset_deg.is_finite() {
            return Err(ScenarioError::invalid(
                "classify_offset_deg",
                "must be finite",
            ));
        }

        if !positive(self.duration) {
            return Err(ScenarioError::invalid("duration", "must be positive"));
        }
        if !positive(self.dt_control) {
            return Err(ScenarioError::invalid("dt_control", "must be positive"));
        }
        if !positive(self.dt_decision) {
            return Err(ScenarioError::invalid("dt_decision", "must be positive"));
        }
        let ratio = self.dt_decision / self.dt_control;
        if ratio < 1.0 - 1e-9 || (ratio - ratio.round()).abs() > 1e-9 {
            return Err(ScenarioError::invalid(
                "dt_decision",
                format!(
                    "must be an integer multiple of dt_control ({} / {} = {ratio})",
                    self.dt_decision, self.dt_control
                ),
            ));
        }

        Ok(())
    }

    /// Control steps per decision cycle.
    pub fn decision_period(&self) -> u64 {
        (self.dt_decision / self.dt_control).round() as u64
    }

    /// Total number of control steps.
    pub fn step_count(&self) -> u64 {
        (self.duration / self.dt_control).round() as u64
    }
}

/// Load and validate a scenario file.
pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ScenarioConfig::from_json_str(&text)
}

/// The four scenarios shipped with the crate, embedded so the binary and
/// the test suite need no working-directory assumptions.
pub const BUNDLED_SCENARIOS: &[(&str, &str)] = &[
    (
        "crossing_giveway",
        include_str!("../../scenarios/crossing_giveway.json"),
    ),
    ("head_on", include_str!("../../scenarios/head_on.json")),
    ("overtaking", include_str!("../../scenarios/overtaking.json")),
    (
        "crossing_standon",
        include_str!("../../scenarios/crossing_standon.json"),
    ),
];

pub fn bundled_scenario_names() -> Vec<&'static str> {
    BUNDLED_SCENARIOS.iter().map(|(name, _)| *name).collect()
}

pub fn bundled_scenario(name: &str) -> Option<Result<ScenarioConfig, ScenarioError>> {
    BUNDLED_SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| ScenarioConfig::from_json_str(text))
}
