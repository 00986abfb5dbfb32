//! Deterministic pursuit-evasion games between damped point masses.
//!
//! Two unit-mass agents move in the plane under `x'' = -mu x' + a`. The
//! pursuer wins when the separation falls to the capture radius `eps`; the
//! evader wins by surviving to `t_max`. Strategies are either the closed-form
//! baseline laws or learned actor networks loaded from portable weight files.
//!
//! ```
//! use pursuit_core::{run_episode, EpisodeConfig, Outcome, Policy, Vec2};
//!
//! let config = EpisodeConfig::at_rest(
//!     Policy::baseline_pursuit(4.0)?,
//!     Policy::baseline_evasion(2.0, 2.4)?,
//!     Vec2::new(0.0, -4.0),
//!     Vec2::ZERO,
//! );
//! let result = run_episode(&config)?;
//! assert_eq!(result.outcome, Outcome::Captured);
//! # Ok::<(), pursuit_core::Error>(())
//! ```
//!
//! The guide under `book/` walks through each module; its code blocks are
//! compiled and run as doc-tests of this crate.

pub mod dynamics;
pub mod episode;
mod error;
pub mod golden;
pub mod mlp;
pub mod num;
pub mod strategies;
pub mod svg;
pub mod zones;

pub use dynamics::{clamp_acceleration, step, unit_vector_to_evader, AgentState, Scheme, Vec2, WorldParams};
pub use episode::{is_captured, reward, run_episode, EpisodeConfig, EpisodeResult, Outcome, TrajectoryRow};
pub use error::{Error, Result};
pub use mlp::{build_observation, load_policy, Activation, Layer, MlpNet, ObsVector, WeightFileError};
pub use strategies::{
    baseline_evasion, baseline_pursuit, perpendicular_turn, policy_action, GameObservation, Perspective, Policy,
};
pub use zones::{extract_boundary, fit_phase_line, sweep, Boundary, GridSpec, LineFit, ZoneGrid};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/strategies.md")]
    mod strategies {}
    #[doc = include_str!("../../../book/src/learned-policies.md")]
    mod learned_policies {}
    #[doc = include_str!("../../../book/src/episodes.md")]
    mod episodes {}
    #[doc = include_str!("../../../book/src/zones.md")]
    mod zones {}
}
