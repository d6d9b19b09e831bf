//! Structured maritime prompt construction.
//!
//! The template has three parts: the bearing interpretation mapping (how
//! relative headings classify the encounter), rule-specific constraints
//! (the conduct rules in plain language), and decision parameters (the
//! critical thresholds plus a strict three-field output format). Rendering
//! is deterministic: telemetry is formatted with fixed two-decimal
//! precision, so identical inputs produce byte-identical prompts.

use serde::{Deserialize, Serialize};

use crate::colregs::{DecisionState, ManeuverAction, Thresholds};
use crate::risk::{EncounterGeometry, RiskBreakdown};

use super::LlmError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptTemplate {
    /// How relative headings map onto encounter classes.
    pub bearing_map_text: String,
    /// Conduct-rule constraints the decision must respect.
    pub rule_constraints_text: String,
    /// Threshold values and the required output format.
    pub decision_params_text: String,
}

impl PromptTemplate {
    /// Template with the threshold values baked into the decision
    /// parameters section.
    pub fn with_thresholds(thresholds: &Thresholds) -> Self {
        Self {
            bearing_map_text: "Classify the encounter from the relative heading psi_rel \
                (target heading minus own heading, wrapped to (-180, 180] degrees): \
                head-on when -6 <= psi_rel <= 6; otherwise overtaking when \
                -112 <= psi_rel <= 112; otherwise crossing. Boundary values belong \
                to the earlier class."
                .to_string(),
            rule_constraints_text: "Rule 13: an overtaking vessel keeps out of the way of \
                the vessel being overtaken. Rule 14: when two vessels meet head-on with \
                risk of collision, each alters course to starboard. Rule 15: in a \
                crossing, the vessel which has the other on her own starboard side \
                gives way and avoids crossing ahead. Rule 16: a give-way vessel acts \
                early and substantially to keep well clear. Rule 17: the stand-on \
                vessel keeps her course and speed."
                .to_string(),
            decision_params_text: format!(
                "Critical thresholds: risk {:.2}, range {:.0} m, DCPA {:.0} m, TCPA {:.0} s. \
                 A maneuver is warranted when the risk index reaches the critical risk \
                 threshold. Respond with exactly three labelled lines:\n\
                 SITUATION: head-on | overtaking | crossing\n\
                 ACTION: Stand-on | Give-way, turn port | Give-way, turn starboard\n\
                 REASONING: one or two sentences citing the applicable rule",
                thresholds.risk, thresholds.range, thresholds.dcpa, thresholds.tcpa
            ),
        }
    }
}

impl Default for PromptTemplate {
    fn default() -> Self {
        Self::with_thresholds(&Thresholds::default())
    }
}

fn maneuver_status(state: &DecisionState) -> String {
    if !state.active {
        return "none (tracking waypoints)".to_string();
    }
    match state.action {
        Some(ManeuverAction::GiveWay(turn)) => format!(
            "give-way (turn {}) since cycle {}",
            turn,
            state.initiation_cycle.unwrap_or(0)
        ),
        _ => "stand-on, holding course and speed".to_string(),
    }
}

/// Render the full prompt for one decision cycle.
///
/// Fails on non-finite telemetry (including the infinite-TCPA sentinel);
/// the decider treats that as a query failure and falls back to the rule
/// engine.
pub fn build_prompt(
    geometry: &EncounterGeometry,
    risk: &RiskBreakdown,
    state: &DecisionState,
    template: &PromptTemplate,
) -> Result<String, LlmError> {
    let relative_heading_deg = geometry.relative_heading.to_degrees();
    let telemetry = [
        ("relative heading", relative_heading_deg),
        ("risk", risk.risk),
        ("DCPA", geometry.dcpa),
        ("range", geometry.range),
        ("TCPA", geometry.tcpa),
    ];
    for (name, value) in telemetry {
        if !value.is_finite() {
            return Err(LlmError::NonFiniteTelemetry(name));
        }
    }

    Ok(format!(
        "You are the navigation decision function of an autonomous surface vessel and \
         must choose the collision-regulation-compliant action for the current encounter.\n\
         \n\
         Bearing interpretation: {bearing}\n\
         \n\
         Rule constraints: {rules}\n\
         \n\
         Decision parameters: {params}\n\
         \n\
         Current telemetry:\n\
         Relative heading (deg): {rel:.2}\n\
         Risk index: {risk:.2}\n\
         DCPA (m): {dcpa:.2}\n\
         Range (m): {range:.2}\n\
         TCPA (s): {tcpa:.2}\n\
         Current maneuver status: {status}\n",
        bearing = template.bearing_map_text,
        rules = template.rule_constraints_text,
        params = template.decision_params_text,
        rel = relative_heading_deg,
        risk = risk.risk,
        dcpa = geometry.dcpa,
        range = geometry.range,
        tcpa = geometry.tcpa,
        status = maneuver_status(state),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colregs::{Situation, Turn};

    fn fig6_geometry() -> EncounterGeometry {
        EncounterGeometry {
            range: 431.79,
            bearing: 0.7,
            relative_heading: (-150.09f64).to_radians(),
            cpa_angle: 0.5,
            relative_speed: 22.0,
            own_speed: 16.0,
            target_speed: 8.0,
            dcpa: 257.54,
            tcpa: 16.84,
        }
    }

    fn fig6_risk() -> RiskBreakdown {
        RiskBreakdown {
            dcpa_membership: 0.86,
            tcpa_membership: 0.86,
            range_membership: 0.86,
            risk: 0.86,
        }
    }

    #[test]
    fn prompt_contains_all_telemetry_fields() {
        let prompt = build_prompt(
            &fig6_geometry(),
            &fig6_risk(),
            &DecisionState::default(),
            &PromptTemplate::default(),
        )
        .unwrap();
        for needle in ["0.86", "16.84", "257.54", "431.79", "-150.09"] {
            assert!(prompt.contains(needle), "missing {needle} in prompt");
        }
        assert!(prompt.contains("Current maneuver status: none"));
        assert!(prompt.contains("SITUATION"));
        assert!(prompt.contains("ACTION"));
        assert!(prompt.contains("REASONING"));
    }

    #[test]
    fn prompt_is_deterministic() {
        let a = build_prompt(
            &fig6_geometry(),
            &fig6_risk(),
            &DecisionState::default(),
            &PromptTemplate::default(),
        )
        .unwrap();
        let b = build_prompt(
            &fig6_geometry(),
            &fig6_risk(),
            &DecisionState::default(),
            &PromptTemplate::default(),
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn prompt_reports_active_maneuver_status() {
        let state = DecisionState {
            situation: Some(Situation::Crossing),
            action: Some(ManeuverAction::GiveWay(Turn::Starboard)),
            turning: true,
            initiation_cycle: Some(42),
            active: true,
        };
        let prompt = build_prompt(
            &fig6_geometry(),
            &fig6_risk(),
            &state,
            &PromptTemplate::default(),
        )
        .unwrap();
        assert!(prompt.contains("give-way (turn starboard) since cycle 42"));
    }

    #[test]
    fn prompt_rejects_non_finite_telemetry() {
        let mut g = fig6_geometry();
        g.tcpa = f64::INFINITY;
        let err = build_prompt(
            &g,
            &fig6_risk(),
            &DecisionState::default(),
            &PromptTemplate::default(),
        )
        .unwrap_err();
        assert!(matches!(err, LlmError::NonFiniteTelemetry("TCPA")));
    }
}
