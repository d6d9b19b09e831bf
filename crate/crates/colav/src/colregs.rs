//! Encounter classification, give-way/stand-on role assignment, and the
//! latched encounter state machine.
//!
//! `rule_decide` is the deterministic decision function: it triggers an
//! encounter when the fused risk index crosses the critical threshold,
//! holds the latched action while the encounter is active, and releases
//! once the risk has dropped below the hysteresis band and the geometry is
//! diverging. It doubles as the oracle for - and the fallback behind - the
//! LLM-backed decider.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::risk::{EncounterGeometry, RiskBreakdown};

/// COLREGs encounter class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Situation {
    HeadOn,
    Overtaking,
    Crossing,
}

impl fmt::Display for Situation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Situation::HeadOn => write!(f, "head-on"),
            Situation::Overtaking => write!(f, "overtaking"),
            Situation::Crossing => write!(f, "crossing"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Turn {
    None,
    Port,
    Starboard,
}

impl fmt::Display for Turn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Turn::None => write!(f, "none"),
            Turn::Port => write!(f, "port"),
            Turn::Starboard => write!(f, "starboard"),
        }
    }
}

/// Maneuver action. Stand-on never carries a turn direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManeuverAction {
    StandOn,
    GiveWay(Turn),
}

impl ManeuverAction {
    pub fn is_give_way(&self) -> bool {
        matches!(self, ManeuverAction::GiveWay(_))
    }

    pub fn turn(&self) -> Turn {
        match self {
            ManeuverAction::StandOn => Turn::None,
            ManeuverAction::GiveWay(turn) => *turn,
        }
    }

    /// Signed turn-direction factor: +1 starboard, -1 port, 0 none.
    pub fn turn_sign(&self) -> i8 {
        match self.turn() {
            Turn::None => 0,
            Turn::Port => -1,
            Turn::Starboard => 1,
        }
    }
}

impl fmt::Display for ManeuverAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManeuverAction::StandOn => write!(f, "Stand-on"),
            ManeuverAction::GiveWay(_) => write!(f, "Give-way"),
        }
    }
}

/// Critical thresholds reported to the decision maker, plus the hysteresis
/// margin used for encounter release.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Critical risk index; the sole encounter-initiation trigger.
    pub risk: f64,
    /// Critical range, m (reported as a flag, not a trigger).
    pub range: f64,
    /// Critical DCPA, m.
    pub dcpa: f64,
    /// Critical TCPA, s.
    pub tcpa: f64,
    /// Release margin below the critical risk.
    pub risk_hysteresis: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            risk: 0.75,
            range: 1000.0,
            dcpa: 250.0,
            tcpa: 60.0,
            risk_hysteresis: 0.2,
        }
    }
}

/// Latched encounter state, updated once per decision cycle.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DecisionState {
    /// Situation latched at encounter start.
    pub situation: Option<Situation>,
    /// Action latched at encounter start.
    pub action: Option<ManeuverAction>,
    /// True while a give-way maneuver is being executed.
    pub turning: bool,
    /// Decision cycle at which the first give-way action was taken.
    pub initiation_cycle: Option<u64>,
    /// True while an encounter is in progress.
    pub active: bool,
}

impl DecisionState {
    /// Turn-direction factor the guidance layer should apply right now.
    pub fn turn_sign(&self) -> i8 {
        if self.active {
            self.action.map_or(0, |a| a.turn_sign())
        } else {
            0
        }
    }
}

/// Lifecycle tag carried by every decision so the state machine can tell
/// initiation and hold apart from release and quiescence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncounterPhase {
    /// No encounter: risk below the critical threshold.
    Clear,
    /// Encounter in progress (initiation or hold).
    Engaged,
    /// Encounter ends this cycle.
    Released,
}

/// One decision: the classified situation, the action with turn direction,
/// the COLREGs rule backing it, and a human-readable reasoning line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub situation: Situation,
    pub action: ManeuverAction,
    pub rule_citation: String,
    pub reasoning: String,
    pub phase: EncounterPhase,
}

#[derive(Debug, Error, PartialEq)]
pub enum ColregsError {
    #[error("illegal transition while encounter active: latched {latched} -> proposed {proposed}")]
    IllegalTransition { latched: String, proposed: String },
    #[error("encounter dropped without release")]
    DroppedEncounter,
}

/// Encounter class from the relative heading, degrees in `(-180, 180]`.
///
/// Cases are evaluated in order: head-on within +-6 degrees, otherwise
/// overtaking within +-112 degrees, otherwise crossing. Boundary values
/// belong to the earlier case.
pub fn classify(relative_heading_deg: f64) -> Situation {
    let magnitude = relative_heading_deg.abs();
    if magnitude <= 6.0 {
        Situation::HeadOn
    } else if magnitude <= 112.0 {
        Situation::Overtaking
    } else {
        Situation::Crossing
    }
}

/// Give-way/stand-on role for a classified encounter.
///
/// Crossing: a target on the starboard side (bearing in (0, 112.5] deg)
/// makes own ship the give-way vessel turning starboard; a target to port
/// keeps own ship the stand-on vessel. Head-on: always give way to
/// starboard. Overtaking: own ship gives way when the target lies within
/// 45 degrees of the bow, own speed exceeds target speed, and the range is
/// closing; otherwise own ship stands on.
pub fn determine_role(
    situation: Situation,
    bearing: f64,
    own_speed: f64,
    target_speed: f64,
    closing: bool,
) -> ManeuverAction {
    match situation {
        Situation::HeadOn => ManeuverAction::GiveWay(Turn::Starboard),
        Situation::Crossing => {
            let bearing_deg = bearing.to_degrees();
            if bearing_deg > 0.0 && bearing_deg <= 112.5 {
                ManeuverAction::GiveWay(Turn::Starboard)
            } else {
                ManeuverAction::StandOn
            }
        }
        Situation::Overtaking => {
            if bearing.to_degrees().abs() <= 45.0 && own_speed > target_speed && closing {
                ManeuverAction::GiveWay(Turn::Starboard)
            } else {
                ManeuverAction::StandOn
            }
        }
    }
}

/// COLREGs rule backing a (situation, action) pair during an encounter.
pub fn rule_citation(situation: Situation, action: ManeuverAction) -> &'static str {
    match (situation, action) {
        (Situation::Overtaking, ManeuverAction::GiveWay(_)) => "Rule 13",
        (Situation::HeadOn, ManeuverAction::GiveWay(_)) => "Rule 14",
        (Situation::Crossing, ManeuverAction::GiveWay(_)) => "Rule 15",
        (_, ManeuverAction::StandOn) => "Rule 17",
    }
}

fn initiation_reasoning(
    situation: Situation,
    action: ManeuverAction,
    geometry: &EncounterGeometry,
    risk: &RiskBreakdown,
    thresholds: &Thresholds,
) -> String {
    let bearing_deg = geometry.bearing.to_degrees();
    match (situation, action) {
        (Situation::Crossing, ManeuverAction::GiveWay(_)) => format!(
            "Crossing encounter with the target {:.1} deg on the starboard bow at range {:.0} m; \
             risk {:.2} meets the {:.2} threshold. Own ship is the give-way vessel and turns \
             starboard (Rule 15).",
            bearing_deg, geometry.range, risk.risk, thresholds.risk
        ),
        (Situation::Crossing, ManeuverAction::StandOn) => format!(
            "Crossing encounter with the target to port ({:.1} deg) at range {:.0} m; risk {:.2} \
             is elevated but the give-way duty lies with the target. Own ship holds course and \
             speed (Rule 17).",
            bearing_deg, geometry.range, risk.risk
        ),
        (Situation::HeadOn, _) => format!(
            "Head-on encounter at range {:.0} m; risk {:.2} meets the {:.2} threshold. Own ship \
             alters course to starboard (Rule 14).",
            geometry.range, risk.risk, thresholds.risk
        ),
        (Situation::Overtaking, ManeuverAction::GiveWay(_)) => format!(
            "Overtaking a slower vessel {:.1} deg off the bow at range {:.0} m; risk {:.2} meets \
             the {:.2} threshold. Own ship keeps clear and passes to starboard (Rule 13).",
            bearing_deg, geometry.range, risk.risk, thresholds.risk
        ),
        (Situation::Overtaking, ManeuverAction::StandOn) => format!(
            "Overtaking geometry at range {:.0} m with risk {:.2}, but own ship is not the \
             overtaking vessel. Own ship holds course and speed (Rule 17).",
            geometry.range, risk.risk
        ),
    }
}

fn hold_reasoning(state: &DecisionState) -> String {
    match state.action {
        Some(ManeuverAction::GiveWay(turn)) => {
            let turn_text = match turn {
                Turn::None => "maneuver".to_string(),
                other => format!("{other} turn"),
            };
            format!(
                "Give-way maneuver in progress since cycle {}; holding the {} until the \
                 encounter clears.",
                state.initiation_cycle.unwrap_or(0),
                turn_text
            )
        }
        _ => "Stand-on duty continues while the encounter remains active (Rule 17).".to_string(),
    }
}

/// Deterministic rule-based decision function.
///
/// Inactive below the risk threshold: quiescent, no state change. Risk at
/// or above the threshold: classify, assign the role, and engage. While an
/// encounter is active the latched action is held until the risk falls
/// below `risk - risk_hysteresis` with the geometry diverging (TCPA <= 0,
/// which for straight-line motion is exactly when the range is opening).
pub fn rule_decide(
    geometry: &EncounterGeometry,
    risk: &RiskBreakdown,
    state: &DecisionState,
    thresholds: &Thresholds,
) -> Decision {
    let current_situation = classify(geometry.relative_heading.to_degrees());

    if state.active {
        let situation = state.situation.unwrap_or(current_situation);
        let action = state.action.unwrap_or(ManeuverAction::StandOn);
        let release_risk = thresholds.risk - thresholds.risk_hysteresis;
        let diverging = geometry.tcpa <= 0.0;
        if risk.risk < release_risk && diverging {
            Decision {
                situation,
                action: ManeuverAction::StandOn,
                rule_citation: "None".to_string(),
                reasoning: format!(
                    "Risk {:.2} under the release threshold {:.2} and geometry diverging; \
                     encounter closed, resuming waypoint track.",
                    risk.risk, release_risk
                ),
                phase: EncounterPhase::Released,
            }
        } else {
            Decision {
                situation,
                action,
                rule_citation: rule_citation(situation, action).to_string(),
                reasoning: hold_reasoning(state),
                phase: EncounterPhase::Engaged,
            }
        }
    } else if risk.risk >= thresholds.risk {
        let situation = current_situation;
        let action = determine_role(
            situation,
            geometry.bearing,
            geometry.own_speed,
            geometry.target_speed,
            geometry.closing(),
        );
        Decision {
            situation,
            action,
            rule_citation: rule_citation(situation, action).to_string(),
            reasoning: initiation_reasoning(situation, action, geometry, risk, thresholds),
            phase: EncounterPhase::Engaged,
        }
    } else {
        Decision {
            situation: current_situation,
            action: ManeuverAction::StandOn,
            rule_citation: "None".to_string(),
            reasoning: format!(
                "Risk {:.2} below the {:.2} threshold; holding course on the waypoint track.",
                risk.risk, thresholds.risk
            ),
            phase: EncounterPhase::Clear,
        }
    }
}

/// Apply one decision to the latched state.
///
/// Legal transitions: inactive -> engaged (latch, recording the initiation
/// cycle on the first give-way), engaged -> engaged with the identical
/// action (hold), active -> released (clear). Anything else is rejected
/// and the state is left unchanged; the caller logs the discrepancy.
pub fn update_state(
    state: &DecisionState,
    decision: &Decision,
    cycle: u64,
) -> Result<DecisionState, ColregsError> {
    match (state.active, decision.phase) {
        (false, EncounterPhase::Clear) | (false, EncounterPhase::Released) => Ok(*state),
        (false, EncounterPhase::Engaged) => Ok(DecisionState {
            situation: Some(decision.situation),
            action: Some(decision.action),
            turning: decision.action.is_give_way(),
            initiation_cycle: if decision.action.is_give_way() {
                Some(cycle)
            } else {
                None
            },
            active: true,
        }),
        (true, EncounterPhase::Engaged) => {
            if state.action == Some(decision.action) {
                Ok(*state)
            } else {
                Err(ColregsError::IllegalTransition {
                    latched: state
                        .action
                        .map(|a| format!("{} ({})", a, a.turn()))
                        .unwrap_or_else(|| "none".to_string()),
                    proposed: format!("{} ({})", decision.action, decision.action.turn()),
                })
            }
        }
        (true, EncounterPhase::Released) => Ok(DecisionState {
            turning: false,
            active: false,
            ..*state
        }),
        (true, EncounterPhase::Clear) => Err(ColregsError::DroppedEncounter),
    }
}
