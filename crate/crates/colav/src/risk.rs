//! Encounter geometry and fuzzy collision-risk assessment.
//!
//! Geometry between two vessels reduces to range, bearing, relative
//! heading, and the closest-point-of-approach pair (DCPA, TCPA) computed
//! from the relative velocity. The risk index averages three Z-shaped
//! fuzzy memberships over DCPA, TCPA, and range, so it is always a
//! normalized value in `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::angles::wrap_angle;
use crate::dynamics::VesselState;

/// Relative geometry between own ship and a target ship.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncounterGeometry {
    /// Distance to the target, m.
    pub range: f64,
    /// Bearing to the target relative to own heading, rad, starboard positive.
    pub bearing: f64,
    /// Target heading minus own heading, wrapped, rad.
    pub relative_heading: f64,
    /// Signed angle from the target-to-own line of sight to the relative
    /// velocity, rad.
    pub cpa_angle: f64,
    /// Magnitude of the relative velocity, m/s.
    pub relative_speed: f64,
    /// Own ship speed, m/s, carried along for role determination.
    pub own_speed: f64,
    /// Target ship speed, m/s.
    pub target_speed: f64,
    /// Distance at the closest point of approach, m (always >= 0).
    pub dcpa: f64,
    /// Time to the closest point of approach, s. Negative once past CPA;
    /// `f64::INFINITY` when the vessels keep a constant separation.
    pub tcpa: f64,
}

impl EncounterGeometry {
    /// True while the vessels are still converging.
    pub fn closing(&self) -> bool {
        self.tcpa.is_finite() && self.tcpa > 0.0
    }
}

/// Geometry of the encounter assuming both vessels hold course and speed.
///
/// When the relative speed vanishes the separation never changes: `tcpa`
/// is reported as `f64::INFINITY` and `dcpa` equals the current range.
pub fn relative_geometry(own: &VesselState, target: &VesselState) -> EncounterGeometry {
    let dx = target.x - own.x;
    let dy = target.y - own.y;
    let range = dx.hypot(dy);
    let bearing = wrap_angle(dy.atan2(dx) - own.heading);
    let relative_heading = wrap_angle(target.heading - own.heading);

    let vx = target.speed * target.heading.cos() - own.speed * own.heading.cos();
    let vy = target.speed * target.heading.sin() - own.speed * own.heading.sin();
    let relative_speed = vx.hypot(vy);

    if relative_speed < 1e-9 {
        return EncounterGeometry {
            range,
            bearing,
            relative_heading,
            cpa_angle: 0.0,
            relative_speed: 0.0,
            own_speed: own.speed,
            target_speed: target.speed,
            dcpa: range,
            tcpa: f64::INFINITY,
        };
    }

    // Angle between the line of sight from target to own ship and the
    // velocity of the target relative to own ship.
    let cpa_angle = wrap_angle(vy.atan2(vx) - (-dy).atan2(-dx));
    let dcpa = (range * cpa_angle.sin()).abs();
    let tcpa = range * cpa_angle.cos() / relative_speed;

    EncounterGeometry {
        range,
        bearing,
        relative_heading,
        cpa_angle,
        relative_speed,
        own_speed: own.speed,
        target_speed: target.speed,
        dcpa,
        tcpa,
    }
}

/// Knee pair of a Z-shaped membership: 1 at or below `lower`, 0 at or
/// above `upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZmfKnees {
    pub lower: f64,
    pub upper: f64,
}

impl ZmfKnees {
    pub fn new(lower: f64, upper: f64) -> Self {
        debug_assert!(lower < upper);
        Self { lower, upper }
    }

    pub fn is_valid(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite() && self.lower < self.upper
    }
}

/// Z-shaped fuzzy membership: the classic piecewise-quadratic spline that
/// falls smoothly from 1 at the lower knee to 0 at the upper knee, with
/// value 0.5 at the midpoint.
pub fn zmf(x: f64, knees: ZmfKnees) -> f64 {
    let ZmfKnees { lower: a, upper: b } = knees;
    debug_assert!(a < b);
    if x <= a {
        1.0
    } else if x >= b {
        0.0
    } else if x <= (a + b) / 2.0 {
        let z = (x - a) / (b - a);
        1.0 - 2.0 * z * z
    } else {
        let z = (x - b) / (b - a);
        2.0 * z * z
    }
}

/// Knee pairs for the three risk factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RiskKnees {
    pub dcpa: ZmfKnees,
    pub tcpa: ZmfKnees,
    pub range: ZmfKnees,
}

impl Default for RiskKnees {
    /// Shipped calibration. Each membership starts rising as soon as its
    /// indicator drops below the outer knee and saturates only at contact;
    /// the outer knees are placed so the index reads 0.86 on a
    /// close-quarters crossing (DCPA 257.54 m, TCPA 16.84 s, range
    /// 431.79 m) and 0.78 on a moderate one (296.21 m, 53.27 s, 407.47 m).
    fn default() -> Self {
        Self {
            dcpa: ZmfKnees::new(0.0, 800.0),
            tcpa: ZmfKnees::new(0.0, 160.0),
            range: ZmfKnees::new(0.0, 1400.0),
        }
    }
}

/// The three memberships and their normalized mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskBreakdown {
    pub dcpa_membership: f64,
    pub tcpa_membership: f64,
    pub range_membership: f64,
    pub risk: f64,
}

/// Normalized fuzzy risk index for one encounter geometry.
///
/// A non-positive or infinite TCPA (diverging or never-closing geometry)
/// contributes zero through the TCPA membership.
pub fn risk_index(geometry: &EncounterGeometry, knees: &RiskKnees) -> RiskBreakdown {
    let dcpa_membership = zmf(geometry.dcpa, knees.dcpa);
    let tcpa_membership = if geometry.tcpa.is_finite() && geometry.tcpa > 0.0 {
        zmf(geometry.tcpa, knees.tcpa)
    } else {
        0.0
    };
    let range_membership = zmf(geometry.range, knees.range);
    RiskBreakdown {
        dcpa_membership,
        tcpa_membership,
        range_membership,
        risk: (dcpa_membership + tcpa_membership + range_membership) / 3.0,
    }
}
