//! Nonlinear surface-vessel model.
//!
//! Six states: North/East position, heading, yaw rate, surge speed, and a
//! thrust-equivalent disturbance. Yaw rate and speed follow first-order
//! responses to the (saturated) steering command and the thrust command;
//! the disturbance is a first-order Markov process driven by a per-step
//! Gaussian sample supplied by the caller. Integration is classical
//! fixed-step fourth-order Runge-Kutta so that runs replay bit-identically.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angles::wrap_angle;

/// Kinematic and dynamic state of one vessel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VesselState {
    /// North position, m.
    pub x: f64,
    /// East position, m.
    pub y: f64,
    /// Heading, rad, clockwise from North, wrapped to `(-pi, pi]`.
    pub heading: f64,
    /// Yaw rate, rad/s.
    pub yaw_rate: f64,
    /// Surge speed, m/s.
    pub speed: f64,
    /// Thrust-equivalent disturbance state.
    pub disturbance: f64,
}

impl VesselState {
    pub fn at_rest() -> Self {
        Self {
            x: 0.0,
            y: 0.0,
            heading: 0.0,
            yaw_rate: 0.0,
            speed: 0.0,
            disturbance: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite()
            && self.y.is_finite()
            && self.heading.is_finite()
            && self.yaw_rate.is_finite()
            && self.speed.is_finite()
            && self.disturbance.is_finite()
    }
}

/// Model parameters. Time constants in seconds, gains in model units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VesselParams {
    /// Yaw-rate response time constant, s.
    pub yaw_time_constant: f64,
    /// Steady-state yaw rate per control unit, (rad/s)/unit.
    pub yaw_gain: f64,
    /// Speed response time constant, s.
    pub speed_time_constant: f64,
    /// Steady-state speed per thrust unit, (m/s)/unit.
    pub speed_gain: f64,
    /// Disturbance decay time constant, s.
    pub disturbance_time_constant: f64,
    /// Std-dev of the per-step disturbance noise sample. 0 disables it.
    pub disturbance_noise_std: f64,
    /// Steering command saturation bound, control units.
    pub control_limit: f64,
    /// Commanded thrust, thrust units.
    pub thrust: f64,
}

impl Default for VesselParams {
    fn default() -> Self {
        Self {
            yaw_time_constant: 10.0,
            yaw_gain: 0.005,
            speed_time_constant: 20.0,
            speed_gain: 1.0,
            disturbance_time_constant: 50.0,
            disturbance_noise_std: 0.0,
            control_limit: 20.0,
            thrust: 16.0,
        }
    }
}

impl VesselParams {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let fields = [
            ("yaw_time_constant", self.yaw_time_constant),
            ("yaw_gain", self.yaw_gain),
            ("speed_time_constant", self.speed_time_constant),
            ("speed_gain", self.speed_gain),
            ("disturbance_time_constant", self.disturbance_time_constant),
            ("disturbance_noise_std", self.disturbance_noise_std),
            ("control_limit", self.control_limit),
            ("thrust", self.thrust),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(DynamicsError::NonFiniteParam(name));
            }
        }
        if self.yaw_time_constant <= 0.0 {
            return Err(DynamicsError::NonPositive("yaw_time_constant"));
        }
        if self.speed_time_constant <= 0.0 {
            return Err(DynamicsError::NonPositive("speed_time_constant"));
        }
        if self.disturbance_time_constant <= 0.0 {
            return Err(DynamicsError::NonPositive("disturbance_time_constant"));
        }
        if self.control_limit <= 0.0 {
            return Err(DynamicsError::NonPositive("control_limit"));
        }
        if self.disturbance_noise_std < 0.0 {
            return Err(DynamicsError::NonPositive("disturbance_noise_std"));
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("non-finite vessel state ({0}); upstream numerical blow-up")]
    NonFiniteState(&'static str),
    #[error("non-finite vessel parameter {0}")]
    NonFiniteParam(&'static str),
    #[error("vessel parameter {0} must be positive")]
    NonPositive(&'static str),
    #[error("integration step must be positive, got {0}")]
    InvalidStep(f64),
}

/// Clamp `value` to `[-limit, +limit]`. `limit` must be positive.
pub fn saturate(value: f64, limit: f64) -> f64 {
    debug_assert!(limit > 0.0);
    value.clamp(-limit, limit)
}

#[derive(Clone, Copy)]
struct Derivatives {
    dx: f64,
    dy: f64,
    dheading: f64,
    dyaw_rate: f64,
    dspeed: f64,
    ddisturbance: f64,
}

fn derivatives(s: &VesselState, steering: f64, params: &VesselParams, noise: f64) -> Derivatives {
    Derivatives {
        dx: s.speed * s.heading.cos(),
        dy: s.speed * s.heading.sin(),
        dheading: s.yaw_rate,
        dyaw_rate: (-s.yaw_rate + params.yaw_gain * steering) / params.yaw_time_constant,
        dspeed: (-s.speed + params.speed_gain * (params.thrust - s.disturbance))
            / params.speed_time_constant,
        ddisturbance: -s.disturbance / params.disturbance_time_constant + noise,
    }
}

fn offset(s: &VesselState, d: &Derivatives, h: f64) -> VesselState {
    VesselState {
        x: s.x + h * d.dx,
        y: s.y + h * d.dy,
        heading: s.heading + h * d.dheading,
        yaw_rate: s.yaw_rate + h * d.dyaw_rate,
        speed: s.speed + h * d.dspeed,
        disturbance: s.disturbance + h * d.ddisturbance,
    }
}

/// Advance the vessel by one fixed step of length `dt`.
///
/// The steering command saturates to `[-control_limit, +control_limit]`
/// inside this function so callers cannot bypass the actuator bound. The
/// noise sample is held constant over the step. The returned heading is
/// wrapped to `(-pi, pi]`.
pub fn step(
    state: &VesselState,
    steering_cmd: f64,
    params: &VesselParams,
    dt: f64,
    noise: f64,
) -> Result<VesselState, DynamicsError> {
    if !state.is_finite() {
        return Err(DynamicsError::NonFiniteState("input state"));
    }
    params.validate()?;
    if !dt.is_finite() || dt <= 0.0 {
        return Err(DynamicsError::InvalidStep(dt));
    }
    if !steering_cmd.is_finite() {
        return Err(DynamicsError::NonFiniteState("steering command"));
    }
    if !noise.is_finite() {
        return Err(DynamicsError::NonFiniteState("noise sample"));
    }

    let u_c = saturate(steering_cmd, params.control_limit);

    let k1 = derivatives(state, u_c, params, noise);
    let k2 = derivatives(&offset(state, &k1, dt / 2.0), u_c, params, noise);
    let k3 = derivatives(&offset(state, &k2, dt / 2.0), u_c, params, noise);
    let k4 = derivatives(&offset(state, &k3, dt), u_c, params, noise);

    let sixth = dt / 6.0;
    let next = VesselState {
        x: state.x + sixth * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
        y: state.y + sixth * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy),
        heading: wrap_angle(
            state.heading
                + sixth * (k1.dheading + 2.0 * k2.dheading + 2.0 * k3.dheading + k4.dheading),
        ),
        yaw_rate: state.yaw_rate
            + sixth * (k1.dyaw_rate + 2.0 * k2.dyaw_rate + 2.0 * k3.dyaw_rate + k4.dyaw_rate),
        speed: state.speed
            + sixth * (k1.dspeed + 2.0 * k2.dspeed + 2.0 * k3.dspeed + k4.dspeed),
        disturbance: state.disturbance
            + sixth
                * (k1.ddisturbance
                    + 2.0 * k2.ddisturbance
                    + 2.0 * k3.ddisturbance
                    + k4.ddisturbance),
    };
    Ok(next)
}
