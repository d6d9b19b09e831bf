//! Waypoint guidance: line-of-sight tracking, cross-track correction, and
//! the reactive collision-avoidance heading offset.
//!
//! The desired heading is the wrapped sum of three terms: the bearing to
//! the active waypoint, a cross-track correction that steers back onto the
//! current route leg, and an avoidance offset weighted by obstacle range
//! and bearing with its sign supplied by the decision engine (+1 starboard,
//! -1 port, 0 none).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angles::wrap_angle;
use crate::risk::{zmf, ZmfKnees};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    /// North coordinate, m.
    pub x: f64,
    /// East coordinate, m.
    pub y: f64,
}

impl Waypoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        (self.x - x).hypot(self.y - y)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GuidanceError {
    #[error("route needs at least two waypoints, got {0}")]
    TooFewWaypoints(usize),
    #[error("waypoints {0} and {1} coincide")]
    CoincidentWaypoints(usize, usize),
    #[error("non-finite waypoint coordinate at index {0}")]
    NonFiniteWaypoint(usize),
    #[error("vessel is at the active waypoint; advance the route")]
    AtWaypoint,
    #[error("route leg has zero length")]
    DegenerateLeg,
}

/// An ordered waypoint list plus the index of the active (target) waypoint.
/// The leg currently tracked runs from `active_index - 1` to `active_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    waypoints: Vec<Waypoint>,
    active_index: usize,
}

impl Route {
    pub fn new(waypoints: Vec<Waypoint>) -> Result<Self, GuidanceError> {
        if waypoints.len() < 2 {
            return Err(GuidanceError::TooFewWaypoints(waypoints.len()));
        }
        for (i, wp) in waypoints.iter().enumerate() {
            if !wp.x.is_finite() || !wp.y.is_finite() {
                return Err(GuidanceError::NonFiniteWaypoint(i));
            }
        }
        for i in 1..waypoints.len() {
            if waypoints[i].distance_to(waypoints[i - 1].x, waypoints[i - 1].y) < 1e-9 {
                return Err(GuidanceError::CoincidentWaypoints(i - 1, i));
            }
        }
        Ok(Self {
            waypoints,
            active_index: 1,
        })
    }

    pub fn active(&self) -> Waypoint {
        self.waypoints[self.active_index]
    }

    pub fn previous(&self) -> Waypoint {
        self.waypoints[self.active_index - 1]
    }

    pub fn active_index(&self) -> usize {
        self.active_index
    }

    pub fn waypoints(&self) -> &[Waypoint] {
        &self.waypoints
    }

    pub fn at_final_leg(&self) -> bool {
        self.active_index == self.waypoints.len() - 1
    }

    /// Advance the active waypoint when the vessel is inside the acceptance
    /// circle. The final waypoint stays active at route end. Returns true
    /// when the index moved.
    pub fn advance(&mut self, x: f64, y: f64, acceptance_radius: f64) -> bool {
        if self.at_final_leg() {
            return false;
        }
        if self.active().distance_to(x, y) < acceptance_radius {
            self.active_index += 1;
            true
        } else {
            false
        }
    }
}

/// Along-track/cross-track decomposition of the vessel position relative
/// to the active route leg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathFrame {
    /// Leg length, m.
    pub leg_length: f64,
    /// Leg direction, rad.
    pub leg_heading: f64,
    /// Distance still to travel along the leg direction, m.
    pub along_track: f64,
    /// Angle from the vessel-to-waypoint bearing to the leg heading, rad.
    pub wp_angle: f64,
    /// Cross-track error, m; positive when the vessel sits starboard of
    /// the leg direction.
    pub cross_track: f64,
}

/// Bearing from the vessel to the waypoint, i.e. the line-of-sight term.
pub fn los_heading(x: f64, y: f64, wp: Waypoint) -> Result<f64, GuidanceError> {
    let dx = wp.x - x;
    let dy = wp.y - y;
    if dx.hypot(dy) < 1e-9 {
        return Err(GuidanceError::AtWaypoint);
    }
    // atan2 can return exactly -pi; keep every heading in (-pi, pi].
    Ok(wrap_angle(dy.atan2(dx)))
}

/// Leg geometry for the vessel at `(x, y)` tracking the leg from
/// `wp_prev` to `wp`.
pub fn path_frame(
    x: f64,
    y: f64,
    wp_prev: Waypoint,
    wp: Waypoint,
) -> Result<PathFrame, GuidanceError> {
    let leg_dx = wp.x - wp_prev.x;
    let leg_dy = wp.y - wp_prev.y;
    let leg_length = leg_dx.hypot(leg_dy);
    if leg_length < 1e-9 {
        return Err(GuidanceError::DegenerateLeg);
    }
    let leg_heading = wrap_angle(leg_dy.atan2(leg_dx));

    // Projection of the remaining displacement to the waypoint onto the
    // leg direction.
    let ex = wp.x - x;
    let ey = wp.y - y;
    let along_track = (ex * leg_dx + ey * leg_dy) / leg_length;

    let wp_angle = match los_heading(x, y, wp) {
        Ok(bearing_to_wp) => wrap_angle(leg_heading - bearing_to_wp),
        // On top of the waypoint every direction is as good as another.
        Err(_) => 0.0,
    };
    let cross_track = along_track * wp_angle.tan();

    Ok(PathFrame {
        leg_length,
        leg_heading,
        along_track,
        wp_angle,
        cross_track,
    })
}

/// Heading correction that steers the cross-track error to zero;
/// bounded in `(-pi/2, pi/2)` and odd in the error.
pub fn cte_correction(frame: &PathFrame, cte_damping: f64) -> f64 {
    debug_assert!(cte_damping > 0.0);
    -(frame.cross_track / cte_damping).atan()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GuidanceParams {
    /// Cross-track damping distance, m.
    pub cte_damping: f64,
    /// Full-deflection avoidance offset, rad.
    pub colav_gain: f64,
    /// Range knees of the avoidance weight: full weight at or below the
    /// lower knee, zero at or above the upper knee.
    pub colav_range_knees: ZmfKnees,
    /// Waypoint acceptance radius, m.
    pub acceptance_radius: f64,
}

impl Default for GuidanceParams {
    fn default() -> Self {
        Self {
            cte_damping: 200.0,
            colav_gain: 0.9,
            colav_range_knees: ZmfKnees::new(400.0, 1200.0),
            acceptance_radius: 100.0,
        }
    }
}

/// Reactive avoidance offset: turn sign times gain times range and bearing
/// weights. Zero whenever `turn_sign` is zero (stand-on / no maneuver).
///
/// The range weight is Z-shaped over the knees; the bearing weight is
/// `max(0, cos(bearing))`, so obstacles ahead count fully and obstacles
/// abeam or astern not at all.
pub fn colav_offset(range: f64, bearing: f64, turn_sign: i8, params: &GuidanceParams) -> f64 {
    debug_assert!((-1..=1).contains(&turn_sign));
    if turn_sign == 0 {
        return 0.0;
    }
    let w_range = zmf(range, params.colav_range_knees);
    let w_bearing = bearing.cos().max(0.0);
    f64::from(turn_sign) * params.colav_gain * w_range * w_bearing
}

/// Wrapped sum of the three guidance terms.
pub fn desired_heading(los: f64, cte: f64, colav: f64) -> f64 {
    wrap_angle(los + cte + colav)
}
