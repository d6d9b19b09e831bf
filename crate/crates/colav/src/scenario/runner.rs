//! The closed simulation loop: 100 Hz guidance/control/dynamics with a
//! 1 Hz decision cadence (both configurable), deterministic for a fixed
//! seed.
//!
//! Per control step: encounter geometry, waypoint progression, the three
//! guidance terms, PD control, and one integrator step for each vessel
//! (the target holds constant course and speed). On decision boundaries
//! the risk index is evaluated and the decider consulted; its decision is
//! latched through the state machine and the resulting turn sign feeds the
//! avoidance offset until the next boundary.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::angles::wrap_angle;
use crate::colregs::{update_state, Decision, DecisionState};
use crate::control::control;
use crate::dynamics::{step, VesselParams, VesselState};
use crate::guidance::{colav_offset, cte_correction, desired_heading, los_heading, path_frame, Route};
use crate::llm::{
    ConcurrentDecider, Decider, DecisionContext, DecisionSource, FixtureTransport, LlmDecider,
    PromptTemplate, RuleDecider,
};
use crate::risk::{relative_geometry, risk_index, RiskBreakdown};

use super::config::{DeciderKind, ScenarioConfig, ScenarioError};

/// Any separation below this is scored as a collision, m.
pub const COLLISION_RANGE_M: f64 = 50.0;

/// One control-rate log row: the state at `time` plus the commands
/// computed from it.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord {
    pub time: f64,
    pub own: VesselState,
    pub target: VesselState,
    pub desired_heading: f64,
    pub los_term: f64,
    pub cte_term: f64,
    pub colav_term: f64,
    pub steering_cmd: f64,
}

/// One decision-rate log row.
#[derive(Debug, Clone)]
pub struct DecisionRecord {
    pub cycle: u64,
    pub time: f64,
    pub decision: Decision,
    pub risk: RiskBreakdown,
    pub range: f64,
    pub dcpa: f64,
    pub tcpa: f64,
    pub source: DecisionSource,
    /// Whether an LLM decider would have been consulted this cycle.
    pub consulted: bool,
    pub discrepancy: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct TrajectoryLog {
    pub steps: Vec<StepRecord>,
    pub decisions: Vec<DecisionRecord>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SummaryMetrics {
    pub min_range: f64,
    /// Smallest DCPA sampled while an encounter was active; absent when no
    /// encounter occurred.
    pub min_dcpa_during_encounter: Option<f64>,
    pub max_risk: f64,
    pub give_way_initiations: u32,
    pub action_transitions: u32,
    pub final_cross_track: f64,
    pub collision: bool,
}

/// Build the decider named by the config.
pub fn build_decider(config: &ScenarioConfig) -> Result<Box<dyn Decider>, ScenarioError> {
    let template = PromptTemplate::with_thresholds(&config.thresholds);
    let inner: Box<dyn Decider> = match config.decider {
        DeciderKind::Rule => Box::new(RuleDecider),
        DeciderKind::Llm => Box::new(LlmDecider::over_http(template, config.llm.clone())),
        DeciderKind::Mock => {
            let path = config
                .mock_fixtures
                .as_ref()
                .ok_or_else(|| ScenarioError::Decider("mock decider without fixtures".into()))?;
            let transport = FixtureTransport::from_path(path)
                .map_err(|e| ScenarioError::Decider(e.to_string()))?;
            Box::new(LlmDecider::new(template, config.llm.clone(), Box::new(transport)))
        }
    };
    if config.concurrent_decider && config.decider != DeciderKind::Rule {
        Ok(Box::new(ConcurrentDecider::new(inner)))
    } else {
        Ok(inner)
    }
}

/// Run the scenario with the decider named in the config.
pub fn run(config: &ScenarioConfig) -> Result<(TrajectoryLog, SummaryMetrics), ScenarioError> {
    let decider = build_decider(config)?;
    run_with_decider(config, decider)
}

/// Run the scenario with an injected decider (tests use this to script
/// transports directly).
pub fn run_with_decider(
    config: &ScenarioConfig,
    mut decider: Box<dyn Decider>,
) -> Result<(TrajectoryLog, SummaryMetrics), ScenarioError> {
    let mut route = Route::new(config.own_route.clone())
        .map_err(|e| ScenarioError::Invalid {
            field: "own_route".to_string(),
            reason: e.to_string(),
        })?;

    // Own ship starts at the first waypoint, on the first leg heading, at
    // the commanded cruising speed with the thrust trimmed to hold it.
    let first_leg = path_frame(
        route.previous().x,
        route.previous().y,
        route.previous(),
        route.active(),
    )
    .map_err(|e| ScenarioError::Invalid {
        field: "own_route".to_string(),
        reason: e.to_string(),
    })?;
    let mut own = VesselState {
        x: route.previous().x,
        y: route.previous().y,
        heading: first_leg.leg_heading,
        yaw_rate: 0.0,
        speed: config.own_speed_cmd,
        disturbance: 0.0,
    };
    let own_params = VesselParams {
        thrust: config.own_speed_cmd / config.vessel_params.speed_gain,
        ..config.vessel_params
    };

    let target_cfg = config.target_initial;
    let mut target = VesselState {
        x: target_cfg.x,
        y: target_cfg.y,
        heading: wrap_angle(target_cfg.heading_deg.to_radians()),
        yaw_rate: 0.0,
        speed: target_cfg.speed,
        disturbance: 0.0,
    };
    let target_params = VesselParams {
        thrust: target_cfg.speed / config.vessel_params.speed_gain,
        disturbance_noise_std: 0.0,
        ..config.vessel_params
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise_dist = Normal::new(0.0, own_params.disturbance_noise_std.max(f64::MIN_POSITIVE))
        .expect("validated noise std");
    let noise_on = own_params.disturbance_noise_std > 0.0;

    let n_steps = config.step_count();
    let period = config.decision_period().max(1);
    let dt = config.dt_control;
    let offset_rad = config.classify_offset_deg.to_radians();

    let mut state = DecisionState::default();
    let mut log = TrajectoryLog {
        steps: Vec::with_capacity(n_steps as usize + 1),
        decisions: Vec::with_capacity((n_steps / period) as usize + 1),
    };
    let mut metrics = SummaryMetrics {
        min_range: f64::INFINITY,
        min_dcpa_during_encounter: None,
        max_risk: 0.0,
        give_way_initiations: 0,
        action_transitions: 0,
        final_cross_track: 0.0,
        collision: false,
    };

    for k in 0..=n_steps {
        let time = k as f64 * dt;
        let mut geometry = relative_geometry(&own, &target);
        if offset_rad != 0.0 {
            geometry.relative_heading = wrap_angle(geometry.relative_heading - offset_rad);
        }

        metrics.min_range = metrics.min_range.min(geometry.range);
        if geometry.range < COLLISION_RANGE_M {
            metrics.collision = true;
        }

        if k < n_steps && k % period == 0 {
            let cycle = k / period;
            let risk = risk_index(&geometry, &config.risk_knees);
            metrics.max_risk = metrics.max_risk.max(risk.risk);

            let ctx = DecisionContext {
                cycle,
                geometry: &geometry,
                risk: &risk,
                state: &state,
                thresholds: &config.thresholds,
            };
            let mut outcome = decider.decide(&ctx);
            let consulted =
                outcome.decision.phase == crate::colregs::EncounterPhase::Engaged;

            let next_state = match update_state(&state, &outcome.decision, cycle) {
                Ok(next) => next,
                Err(e) => {
                    let note = format!("cycle {cycle}: rejected transition: {e}");
                    outcome.discrepancy = Some(match outcome.discrepancy.take() {
                        Some(prev) => format!("{prev}; {note}"),
                        None => note,
                    });
                    state
                }
            };

            if next_state.active != state.active || next_state.action != state.action {
                metrics.action_transitions += 1;
                if next_state.active
                    && !state.active
                    && next_state.action.is_some_and(|a| a.is_give_way())
                {
                    metrics.give_way_initiations += 1;
                }
            }
            state = next_state;

            log.decisions.push(DecisionRecord {
                cycle,
                time,
                decision: outcome.decision.clone(),
                risk,
                range: geometry.range,
                dcpa: geometry.dcpa,
                tcpa: geometry.tcpa,
                source: outcome.source,
                consulted,
                discrepancy: outcome.discrepancy,
            });
        }

        if state.active {
            let best = metrics
                .min_dcpa_during_encounter
                .unwrap_or(f64::INFINITY);
            metrics.min_dcpa_during_encounter = Some(best.min(geometry.dcpa));
        }

        route.advance(own.x, own.y, config.guidance.acceptance_radius);
        let frame = path_frame(own.x, own.y, route.previous(), route.active()).map_err(|e| {
            ScenarioError::Invalid {
                field: "own_route".to_string(),
                reason: e.to_string(),
            }
        })?;
        let los = los_heading(own.x, own.y, route.active()).unwrap_or(frame.leg_heading);
        let cte = cte_correction(&frame, config.guidance.cte_damping);
        let colav = colav_offset(
            geometry.range,
            geometry.bearing,
            state.turn_sign(),
            &config.guidance,
        );
        let psi_d = desired_heading(los, cte, colav);
        let u_c = control(
            psi_d,
            own.heading,
            own.yaw_rate,
            &config.gains,
            config.vessel_params.control_limit,
        );

        log.steps.push(StepRecord {
            time,
            own,
            target,
            desired_heading: psi_d,
            los_term: los,
            cte_term: cte,
            colav_term: colav,
            steering_cmd: u_c,
        });
        metrics.final_cross_track = frame.cross_track;

        if k < n_steps {
            let noise = if noise_on {
                noise_dist.sample(&mut rng)
            } else {
                0.0
            };
            own = step(&own, u_c, &own_params, dt, noise)
                .map_err(|_| ScenarioError::NumericalBlowUp { step: k + 1 })?;
            target = step(&target, 0.0, &target_params, dt, 0.0)
                .map_err(|_| ScenarioError::NumericalBlowUp { step: k + 1 })?;
            if !own.is_finite() || !target.is_finite() {
                return Err(ScenarioError::NumericalBlowUp { step: k + 1 });
            }
        }
    }

    if metrics.min_range.is_infinite() {
        metrics.min_range = 0.0;
    }
    Ok((log, metrics))
}
