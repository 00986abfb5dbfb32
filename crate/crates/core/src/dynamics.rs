//! Planar vectors and time integration of the damped double integrator
//!
//! ```text
//!   x''(t) = -mu * x'(t) + a
//! ```
//!
//! Each agent is a unit point mass driven by a self-propelled acceleration `a`
//! and slowed by linear velocity damping `mu`. Under constant thrust of
//! magnitude `a_max` the speed approaches the terminal value `a_max / mu`.
//!
//! Two schemes advance a state by one step with the acceleration held
//! constant over the step:
//!
//! - [`Scheme::ExactExponential`] evaluates the closed-form solution of the
//!   linear ODE, so it is exact for piecewise-constant acceleration.
//! - [`Scheme::SemiImplicitEuler`] is the damped velocity-first update used by
//!   the training environment. It exists for train/replay parity.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this damping the exact scheme switches to its undamped limit.
const MU_LIMIT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Counterclockwise perpendicular `(-y, x)`.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    /// Rotates counterclockwise by `angle` radians.
    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    #[inline]
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn div(self, k: f64) -> Vec2 {
        Vec2::new(self.x / k, self.y / k)
    }
}

impl From<(f64, f64)> for Vec2 {
    fn from((x, y): (f64, f64)) -> Self {
        Vec2::new(x, y)
    }
}

/// Position and velocity of one agent.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AgentState {
    pub pos: Vec2,
    pub vel: Vec2,
}

impl AgentState {
    pub const fn new(pos: Vec2, vel: Vec2) -> Self {
        AgentState { pos, vel }
    }

    pub fn at_rest(pos: Vec2) -> Self {
        AgentState { pos, vel: Vec2::ZERO }
    }

    pub fn rotated(self, angle: f64) -> Self {
        AgentState::new(self.pos.rotated(angle), self.vel.rotated(angle))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    ExactExponential,
    SemiImplicitEuler,
}

impl Scheme {
    /// Timestep conventionally paired with the scheme.
    pub fn default_dt(self) -> f64 {
        match self {
            Scheme::ExactExponential => 0.01,
            Scheme::SemiImplicitEuler => 0.1,
        }
    }
}

/// Physical and numerical parameters shared by both agents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldParams {
    /// Velocity damping coefficient (1/s).
    pub mu: f64,
    /// Capture radius (m).
    pub eps: f64,
    /// Integration step (s).
    pub dt: f64,
    /// Game horizon (s).
    pub t_max: f64,
    pub scheme: Scheme,
}

impl Default for WorldParams {
    fn default() -> Self {
        WorldParams {
            mu: 0.5,
            eps: 0.5,
            dt: 0.01,
            t_max: 20.0,
            scheme: Scheme::ExactExponential,
        }
    }
}

impl WorldParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return Err(Error::invalid("mu", format!("{} must be finite and >= 0", self.mu)));
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(Error::invalid("eps", format!("{} must be finite and > 0", self.eps)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt", format!("{} must be finite and > 0", self.dt)));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(Error::invalid("t_max", format!("{} must be finite and > 0", self.t_max)));
        }
        if self.dt > self.t_max {
            return Err(Error::invalid(
                "dt",
                format!("{} exceeds t_max = {}", self.dt, self.t_max),
            ));
        }
        if self.scheme == Scheme::SemiImplicitEuler && self.mu * self.dt >= 1.0 {
            return Err(Error::UnstableStep {
                damping: self.mu * self.dt,
            });
        }
        Ok(())
    }
}

/// Unit line-of-sight vector pointing from the pursuer to the evader.
pub fn unit_vector_to_evader(x_p: Vec2, x_e: Vec2) -> Result<Vec2> {
    let r = x_e - x_p;
    let dist = r.norm();
    if dist == 0.0 {
        return Err(Error::CoincidentAgents);
    }
    Ok(r / dist)
}

/// Advances `state` by one `params.dt` under the constant acceleration `accel`.
pub fn step(state: AgentState, accel: Vec2, params: &WorldParams) -> Result<AgentState> {
    debug_assert!(accel.is_finite(), "non-finite acceleration {accel:?}");
    let AgentState { pos, vel } = state;
    let (mu, dt) = (params.mu, params.dt);
    let next = match params.scheme {
        Scheme::ExactExponential => {
            if mu < MU_LIMIT {
                AgentState::new(pos + vel * dt + accel * (0.5 * dt * dt), vel + accel * dt)
            } else {
                let z = mu * dt;
                // 1 - e^(-z) without cancellation for small z
                let decay = -(-z).exp_m1();
                let drift = decay / mu;
                AgentState::new(
                    pos + vel * drift + accel * (dt * dt * thrust_gain(z)),
                    vel * (1.0 - decay) + accel * drift,
                )
            }
        }
        Scheme::SemiImplicitEuler => {
            let damping = mu * dt;
            if damping >= 1.0 {
                return Err(Error::UnstableStep { damping });
            }
            let v = vel * (1.0 - damping) + accel * dt;
            AgentState::new(pos + v * dt, v)
        }
    };
    Ok(next)
}

/// `(e^(-z) - 1 + z) / z^2`, the position gain of a constant thrust over one step
/// in units of `dt^2`. Tends to 1/2 as `z -> 0`.
fn thrust_gain(z: f64) -> f64 {
    if z < 1e-3 {
        0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0 + z * z * z * z / 720.0
    } else {
        ((-z).exp_m1() + z) / (z * z)
    }
}

/// Projects `a` onto the disc of radius `a_max`.
pub fn clamp_acceleration(a: Vec2, a_max: f64) -> Vec2 {
    let norm = a.norm();
    if norm <= a_max {
        a
    } else {
        a * (a_max / norm)
    }
}
