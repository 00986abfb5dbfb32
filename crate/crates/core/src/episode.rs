//! Rolling out a single pursuit-evasion game.
//!
//! Both agents sample their policies on the same pre-step observation, hold
//! the commanded acceleration for one step, and the capture test runs on the
//! post-step positions. The game ends at the first capture or once `t_max`
//! has been reached.

use std::io::Write;

use serde::Serialize;

use crate::dynamics::{step, AgentState, Scheme, Vec2, WorldParams};
use crate::error::{Error, Result};
use crate::num::fmt9;
use crate::strategies::{policy_action, GameObservation, Perspective, Policy};

/// Evader reward per unit of separation while uncaptured.
pub const DISTANCE_REWARD: f64 = 0.1;
/// Evader reward on capture (the pursuer receives the negation).
pub const CAPTURE_REWARD: f64 = -10.0;

pub const TRAJECTORY_HEADER: &str = "t,xp_x,xp_y,xe_x,xe_y,vp_x,vp_y,ve_x,ve_y,ap_x,ap_y,ae_x,ae_y,r_e";

#[derive(Debug, Clone)]
pub struct EpisodeConfig {
    pub world: WorldParams,
    pub pursuer: Policy,
    pub evader: Policy,
    pub x_p0: Vec2,
    pub x_e0: Vec2,
    pub v_p0: Vec2,
    pub v_e0: Vec2,
    /// Recorded for reproducibility; every current policy is deterministic.
    pub seed: u64,
}

impl EpisodeConfig {
    /// Agents at rest at the given positions, default world.
    pub fn at_rest(pursuer: Policy, evader: Policy, x_p0: Vec2, x_e0: Vec2) -> Self {
        EpisodeConfig {
            world: WorldParams::default(),
            pursuer,
            evader,
            x_p0,
            x_e0,
            v_p0: Vec2::ZERO,
            v_e0: Vec2::ZERO,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.world.validate()?;
        self.pursuer.validate()?;
        self.evader.validate()?;
        for (name, v) in [
            ("x_p0", self.x_p0),
            ("x_e0", self.x_e0),
            ("v_p0", self.v_p0),
            ("v_e0", self.v_e0),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "non-finite component"));
            }
        }
        let sep = (self.x_p0 - self.x_e0).norm();
        if sep <= self.world.eps {
            return Err(Error::invalid(
                "x_p0",
                format!("initial separation {sep} is already within the capture radius {}", self.world.eps),
            ));
        }
        if self.world.scheme == Scheme::ExactExponential {
            let reach = self.max_speed() * self.world.dt;
            if reach >= self.world.eps / 2.0 {
                return Err(Error::invalid(
                    "dt",
                    format!(
                        "an agent can move {reach} m per step, which must stay below eps/2 = {} for per-step capture detection",
                        self.world.eps / 2.0
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Upper bound on either agent's speed over the game.
    pub fn max_speed(&self) -> f64 {
        let WorldParams { mu, t_max, .. } = self.world;
        let bound = |v0: Vec2, a_max: f64| {
            let v0 = v0.norm();
            if mu > 0.0 {
                v0.max(a_max / mu)
            } else {
                v0 + a_max * t_max
            }
        };
        bound(self.v_p0, self.pursuer.a_max()).max(bound(self.v_e0, self.evader.a_max()))
    }

    /// Rotates every initial position and velocity by `angle` about the origin.
    pub fn rotated(&self, angle: f64) -> Self {
        EpisodeConfig {
            x_p0: self.x_p0.rotated(angle),
            x_e0: self.x_e0.rotated(angle),
            v_p0: self.v_p0.rotated(angle),
            v_e0: self.v_e0.rotated(angle),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Captured,
    Escaped,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Captured => "captured",
            Outcome::Escaped => "escaped",
        }
    }
}

/// One logged instant. `a_p`/`a_e` are the commands that were held during the
/// step ending at `t` (zero on the initial row).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x_p: Vec2,
    pub x_e: Vec2,
    pub v_p: Vec2,
    pub v_e: Vec2,
    pub a_p: Vec2,
    pub a_e: Vec2,
    pub r_e: f64,
}

impl TrajectoryRow {
    pub fn separation(&self) -> f64 {
        (self.x_p - self.x_e).norm()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub outcome: Outcome,
    pub capture_time: Option<f64>,
    /// Integration steps taken; the trajectory holds `steps + 1` rows.
    pub steps: usize,
    pub trajectory: Vec<TrajectoryRow>,
    pub cumulative_r_e: f64,
    pub seed: u64,
}

impl EpisodeResult {
    pub fn final_row(&self) -> &TrajectoryRow {
        self.trajectory.last().expect("trajectory holds the initial row")
    }

    /// Capture time, or the game length for an escape.
    pub fn survival_time(&self) -> f64 {
        self.capture_time.unwrap_or(self.final_row().t)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{TRAJECTORY_HEADER}")?;
        for r in &self.trajectory {
            let fields = [
                r.t, r.x_p.x, r.x_p.y, r.x_e.x, r.x_e.y, r.v_p.x, r.v_p.y, r.v_e.x, r.v_e.y, r.a_p.x,
                r.a_p.y, r.a_e.x, r.a_e.y, r.r_e,
            ];
            let line: Vec<String> = fields.iter().map(|&v| fmt9(v)).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Zero-sum step reward `(r_e, r_p)`.
pub fn reward(x_p: Vec2, x_e: Vec2, eps: f64) -> (f64, f64) {
    let sep = (x_p - x_e).norm();
    let r_e = if sep > eps {
        DISTANCE_REWARD * sep
    } else {
        CAPTURE_REWARD
    };
    (r_e, -r_e)
}

pub fn is_captured(x_p: Vec2, x_e: Vec2, eps: f64) -> bool {
    (x_p - x_e).norm() <= eps
}

/// Number of steps needed to reach `t_max`.
pub fn step_budget(world: &WorldParams) -> usize {
    // tolerate t_max / dt landing a hair above an integer
    (world.t_max / world.dt - 1e-9).ceil().max(1.0) as usize
}

pub fn run_episode(config: &EpisodeConfig) -> Result<EpisodeResult> {
    config.validate()?;
    let world = &config.world;
    let mut pursuer = AgentState::new(config.x_p0, config.v_p0);
    let mut evader = AgentState::new(config.x_e0, config.v_e0);
    let budget = step_budget(world);

    let mut trajectory = Vec::with_capacity(budget.min(1 << 16) + 1);
    let (r_e, _) = reward(pursuer.pos, evader.pos, world.eps);
    trajectory.push(TrajectoryRow {
        t: 0.0,
        x_p: pursuer.pos,
        x_e: evader.pos,
        v_p: pursuer.vel,
        v_e: evader.vel,
        a_p: Vec2::ZERO,
        a_e: Vec2::ZERO,
        r_e,
    });
    let mut cumulative_r_e = r_e;

    for k in 1..=budget {
        let obs = GameObservation {
            x_p: pursuer.pos,
            x_e: evader.pos,
            v_p: pursuer.vel,
            v_e: evader.vel,
        };
        let a_p = policy_action(&config.pursuer, &obs, Perspective::Pursuer)?;
        let a_e = policy_action(&config.evader, &obs, Perspective::Evader)?;
        pursuer = step(pursuer, a_p, world)?;
        evader = step(evader, a_e, world)?;

        let t = k as f64 * world.dt;
        let (r_e, _) = reward(pursuer.pos, evader.pos, world.eps);
        cumulative_r_e += r_e;
        trajectory.push(TrajectoryRow {
            t,
            x_p: pursuer.pos,
            x_e: evader.pos,
            v_p: pursuer.vel,
            v_e: evader.vel,
            a_p,
            a_e,
            r_e,
        });
        if is_captured(pursuer.pos, evader.pos, world.eps) {
            return Ok(EpisodeResult {
                outcome: Outcome::Captured,
                capture_time: Some(t),
                steps: k,
                trajectory,
                cumulative_r_e,
                seed: config.seed,
            });
        }
    }

    Ok(EpisodeResult {
        outcome: Outcome::Escaped,
        capture_time: None,
        steps: budget,
        trajectory,
        cumulative_r_e,
        seed: config.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case(a_p: f64, a_e: f64) -> EpisodeConfig {
        EpisodeConfig::at_rest(
            Policy::baseline_pursuit(a_p).unwrap(),
            Policy::baseline_evasion(a_e, 2.4).unwrap(),
            Vec2::new(0.0, -4.0),
            Vec2::ZERO,
        )
    }

    #[test]
    fn reward_examples() {
        let (e, p) = reward(Vec2::new(0.0, -4.0), Vec2::ZERO, 0.5);
        assert!((e - 0.4).abs() < 1e-15 && (p + 0.4).abs() < 1e-15);
        assert_eq!(reward(Vec2::new(0.0, 0.5), Vec2::ZERO, 0.5), (-10.0, 10.0));
        let (e, p) = reward(Vec2::new(0.0, 0.5000001), Vec2::ZERO, 0.5);
        assert!((e - 0.05).abs() < 1e-7 && e > 0.05);
        assert_eq!(e + p, 0.0);
    }

    #[test]
    fn capture_predicate() {
        assert!(is_captured(Vec2::ZERO, Vec2::new(0.0, 0.5), 0.5));
        assert!(!is_captured(Vec2::ZERO, Vec2::new(0.0, 0.51), 0.5));
        assert!(is_captured(Vec2::new(2.0, 2.0), Vec2::new(2.0, 2.0), 0.5));
    }

    #[test]
    fn case_one_captured() {
        let r = run_episode(&case(4.0, 2.0)).unwrap();
        assert_eq!(r.outcome, Outcome::Captured);
        assert_eq!(r.trajectory.len(), r.steps + 1);
        assert!(r.final_row().separation() <= 0.5);
    }

    #[test]
    fn case_two_escaped() {
        let r = run_episode(&case(4.0, 2.4)).unwrap();
        assert_eq!(r.outcome, Outcome::Escaped);
        assert!(r.capture_time.is_none());
        assert!(r.final_row().t >= 20.0 - 1e-9);
        assert_eq!(r.steps, 2000);
    }

    #[test]
    fn thrustless_pursuer_never_captures() {
        let r = run_episode(&case(0.0, 2.0)).unwrap();
        assert_eq!(r.outcome, Outcome::Escaped);
    }

    #[test]
    fn rejects_start_inside_capture_radius() {
        let mut c = case(4.0, 2.0);
        c.x_p0 = Vec2::new(0.0, -0.5);
        assert!(matches!(run_episode(&c), Err(Error::InvalidParams { name: "x_p0", .. })));
    }

    #[test]
    fn rejects_tunneling_timestep() {
        let mut c = case(4.0, 2.0);
        c.world.dt = 0.05; // 8 m/s * 0.05 s = 0.4 m > eps / 2
        assert!(matches!(run_episode(&c), Err(Error::InvalidParams { name: "dt", .. })));
    }

    #[test]
    fn euler_scheme_runs_at_training_step() {
        let mut c = case(4.0, 2.0);
        c.world.scheme = Scheme::SemiImplicitEuler;
        c.world.dt = 0.1;
        let r = run_episode(&c).unwrap();
        assert!(r.steps <= 200);
    }

    #[test]
    fn mismatched_policies_fail() {
        let c = EpisodeConfig::at_rest(
            Policy::baseline_evasion(2.0, 1.0).unwrap(),
            Policy::baseline_evasion(2.0, 1.0).unwrap(),
            Vec2::new(0.0, -4.0),
            Vec2::ZERO,
        );
        assert!(matches!(run_episode(&c), Err(Error::PolicyMismatch { .. })));
    }

    #[test]
    fn csv_layout() {
        let r = run_episode(&case(4.0, 2.0)).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(TRAJECTORY_HEADER));
        assert_eq!(lines.next(), Some("0,0,-4,0,0,0,0,0,0,0,0,0,0,0.4"));
        assert_eq!(text.lines().count(), r.trajectory.len() + 1);
        assert!(text.lines().all(|l| l.split(',').count() == 14));
    }

    #[test]
    fn step_budget_rounding() {
        let w = WorldParams::default();
        assert_eq!(step_budget(&w), 2000);
        let w = WorldParams { t_max: 0.3, dt: 0.1, ..w };
        assert_eq!(step_budget(&w), 3);
        let w = WorldParams { t_max: 0.35, dt: 0.1, ..w };
        assert_eq!(step_budget(&w), 4);
    }
}
