//! Pursuit and evasion feedback laws and the uniform policy interface.
//!
//! The baseline pursuer always thrusts at full magnitude along the line of
//! sight `d`. The baseline evader flees along `d` until the separation drops
//! to the critical distance `c`, then thrusts perpendicular to `d`, turning
//! against the pursuer's momentum.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{clamp_acceleration, unit_vector_to_evader, Vec2};
use crate::error::{Error, Result};
use crate::mlp::{build_observation, MlpNet};

const UNIT_TOLERANCE: f64 = 1e-9;
const TIE_TOLERANCE: f64 = 1e-12;
const STILL_SPEED: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Perspective {
    Pursuer,
    Evader,
}

impl Perspective {
    fn name(self) -> &'static str {
        match self {
            Perspective::Pursuer => "pursuer",
            Perspective::Evader => "evader",
        }
    }
}

impl fmt::Display for Perspective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What both agents can see: positions and velocities of pursuer and evader.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GameObservation {
    pub x_p: Vec2,
    pub x_e: Vec2,
    pub v_p: Vec2,
    pub v_e: Vec2,
}

impl GameObservation {
    pub fn separation(&self) -> f64 {
        (self.x_p - self.x_e).norm()
    }

    pub fn rotated(&self, angle: f64) -> Self {
        GameObservation {
            x_p: self.x_p.rotated(angle),
            x_e: self.x_e.rotated(angle),
            v_p: self.v_p.rotated(angle),
            v_e: self.v_e.rotated(angle),
        }
    }
}

/// A strategy together with the agent's maximum thrust.
#[derive(Debug, Clone)]
pub enum Policy {
    BaselinePursuit { a_max: f64 },
    BaselineEvasion { a_max: f64, c: f64 },
    Mlp { net: Arc<MlpNet>, a_max: f64 },
}

impl Policy {
    pub fn baseline_pursuit(a_max: f64) -> Result<Self> {
        check_gain(a_max)?;
        Ok(Policy::BaselinePursuit { a_max })
    }

    pub fn baseline_evasion(a_max: f64, c: f64) -> Result<Self> {
        check_gain(a_max)?;
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::invalid("c", format!("{c} must be finite and >= 0")));
        }
        Ok(Policy::BaselineEvasion { a_max, c })
    }

    /// Learned policy thrusting up to the network's own `a_max`.
    pub fn mlp(net: Arc<MlpNet>) -> Self {
        let a_max = net.a_max();
        Policy::Mlp { net, a_max }
    }

    pub fn a_max(&self) -> f64 {
        match *self {
            Policy::BaselinePursuit { a_max }
            | Policy::BaselineEvasion { a_max, .. }
            | Policy::Mlp { a_max, .. } => a_max,
        }
    }

    /// Same strategy with a different thrust budget. Used by the zone sweep.
    pub fn with_a_max(&self, a_max: f64) -> Self {
        match self {
            Policy::BaselinePursuit { .. } => Policy::BaselinePursuit { a_max },
            Policy::BaselineEvasion { c, .. } => Policy::BaselineEvasion { a_max, c: *c },
            Policy::Mlp { net, .. } => Policy::Mlp {
                net: Arc::clone(net),
                a_max,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Policy::BaselinePursuit { .. } => "baseline-pursuit",
            Policy::BaselineEvasion { .. } => "baseline-evasion",
            Policy::Mlp { .. } => "mlp",
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_gain(self.a_max())?;
        if let Policy::BaselineEvasion { c, .. } = *self {
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::invalid("c", format!("{c} must be finite and >= 0")));
            }
        }
        Ok(())
    }
}

fn check_gain(a_max: f64) -> Result<()> {
    // zero thrust is allowed: a thrustless pursuer is a legitimate degenerate game
    if !(a_max.is_finite() && a_max >= 0.0) {
        return Err(Error::invalid("a_max", format!("{a_max} must be finite and >= 0")));
    }
    Ok(())
}

/// Full thrust along the line of sight.
pub fn baseline_pursuit(obs: &GameObservation, a_p: f64) -> Result<Vec2> {
    Ok(unit_vector_to_evader(obs.x_p, obs.x_e)? * a_p)
}

/// Unit normal of `d` most opposed to the pursuer's velocity.
///
/// Falls back to the counterclockwise normal when the pursuer is still or
/// moving exactly along `d`.
pub fn perpendicular_turn(d: Vec2, pursuer_vel: Vec2) -> Result<Vec2> {
    let norm = d.norm();
    if !((norm - 1.0).abs() <= UNIT_TOLERANCE) {
        return Err(Error::InvalidDirection { norm });
    }
    let ccw = d.perp();
    if pursuer_vel.norm() < STILL_SPEED {
        return Ok(ccw);
    }
    let along_ccw = ccw.dot(pursuer_vel);
    // the clockwise normal has dot product -along_ccw
    if 2.0 * along_ccw.abs() <= TIE_TOLERANCE || along_ccw < 0.0 {
        Ok(ccw)
    } else {
        Ok(-ccw)
    }
}

/// Flee along the line of sight beyond `c`, turn perpendicular at or inside it.
pub fn baseline_evasion(obs: &GameObservation, a_e: f64, c: f64) -> Result<Vec2> {
    let d = unit_vector_to_evader(obs.x_p, obs.x_e)?;
    if obs.separation() > c {
        Ok(d * a_e)
    } else {
        Ok(perpendicular_turn(d, obs.v_p)? * a_e)
    }
}

/// Acceleration commanded by `policy` acting as `perspective`, clamped to the
/// policy's thrust budget.
pub fn policy_action(
    policy: &Policy,
    obs: &GameObservation,
    perspective: Perspective,
) -> Result<Vec2> {
    let raw = match (policy, perspective) {
        (Policy::BaselinePursuit { a_max }, Perspective::Pursuer) => {
            baseline_pursuit(obs, *a_max)?
        }
        (Policy::BaselineEvasion { a_max, c }, Perspective::Evader) => {
            baseline_evasion(obs, *a_max, *c)?
        }
        (Policy::Mlp { net, a_max }, _) => {
            net.forward_scaled(&build_observation(obs, perspective), *a_max)?
        }
        (p, _) => {
            return Err(Error::PolicyMismatch {
                policy: p.kind(),
                perspective: perspective.name(),
            })
        }
    };
    Ok(clamp_acceleration(raw, policy.a_max()))
}
