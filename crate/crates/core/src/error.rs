use thiserror::Error;

use crate::mlp::WeightFileError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The pursuer and evader occupy the same point, so the line of sight is undefined.
    #[error("pursuer and evader are coincident; line of sight is undefined")]
    CoincidentAgents,

    /// Semi-implicit Euler with `mu * dt >= 1` flips the sign of the damping factor.
    #[error("unstable step: mu * dt = {damping} must be < 1 for semi-implicit Euler")]
    UnstableStep { damping: f64 },

    #[error("direction vector is not unit length (norm = {norm})")]
    InvalidDirection { norm: f64 },

    #[error("policy {policy} cannot act as the {perspective}")]
    PolicyMismatch {
        policy: &'static str,
        perspective: &'static str,
    },

    #[error("observation has {got} entries, network expects {expected}")]
    Shape { expected: usize, got: usize },

    #[error(transparent)]
    WeightFile(#[from] WeightFileError),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParams { name: &'static str, reason: String },

    #[error("fewer than 2 usable grid columns for a phase boundary (found {usable})")]
    NoBoundary { usable: usize },

    #[error("cannot fit a line: all boundary points share a_e = {ae}")]
    DegenerateFit { ae: f64 },

    #[error("grid cell (a_e = {ae}, a_p = {ap}): {source}")]
    Cell {
        ae: f64,
        ap: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("zone table line {line}: {reason}")]
    ZoneParse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParams {
            name,
            reason: reason.into(),
        }
    }
}
