//! Feed-forward actor networks exported by the trainer, and their portable
//! weight file.
//!
//! A weight file is UTF-8 JSON:
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "obs_dim": 8,
//!   "act_dim": 2,
//!   "a_max": 4.0,
//!   "obs_layout": "vel2_pos2_relpos2_othervel2",
//!   "layers": [
//!     { "rows": 2, "cols": 8, "weights": [...], "bias": [0.0, 0.0], "activation": "tanh" }
//!   ]
//! }
//! ```
//!
//! `weights` is row-major, `rows * cols` long. The network output is scaled by
//! `a_max` and then projected onto the disc of radius `a_max`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{clamp_acceleration, Vec2};
use crate::error::{Error, Result};
use crate::strategies::{GameObservation, Perspective};

pub const FORMAT_VERSION: u32 = 1;
pub const OBS_DIM: usize = 8;
pub const ACT_DIM: usize = 2;
pub const OBS_LAYOUT: &str = "vel2_pos2_relpos2_othervel2";

/// A weight file was rejected. `location` is either a position in the text
/// or a field path such as `layers[1].cols`.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("weight file error at {location}: {message}")]
pub struct WeightFileError {
    pub location: String,
    pub message: String,
}

impl WeightFileError {
    fn at(location: impl Into<String>, message: impl Into<String>) -> Self {
        WeightFileError {
            location: location.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }
}

/// Dense layer `y = act(W x + b)` with `W` stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn zeros(rows: usize, cols: usize, activation: Activation) -> Self {
        Layer {
            rows,
            cols,
            weights: vec![0.0; rows * cols],
            bias: vec![0.0; rows],
            activation,
        }
    }

    fn apply(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.weights
                .chunks_exact(self.cols)
                .zip(&self.bias)
                .map(|(row, b)| {
                    let z = row.iter().zip(input).fold(*b, |acc, (w, x)| acc + w * x);
                    self.activation.apply(z)
                }),
        );
    }
}

/// Fixed 8-slot observation seen by a learned policy:
/// `[own_vel, own_pos, other_pos - own_pos, other_vel]`, two components each.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObsVector(pub [f64; OBS_DIM]);

impl ObsVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub fn build_observation(obs: &GameObservation, perspective: Perspective) -> ObsVector {
    let (own_pos, own_vel, other_pos, other_vel) = match perspective {
        Perspective::Pursuer => (obs.x_p, obs.v_p, obs.x_e, obs.v_e),
        Perspective::Evader => (obs.x_e, obs.v_e, obs.x_p, obs.v_p),
    };
    let rel = other_pos - own_pos;
    ObsVector([
        own_vel.x,
        own_vel.y,
        own_pos.x,
        own_pos.y,
        rel.x,
        rel.y,
        other_vel.x,
        other_vel.y,
    ])
}

/// Validated actor network. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpNet {
    layers: Vec<Layer>,
    a_max: f64,
}

impl MlpNet {
    pub fn new(layers: Vec<Layer>, a_max: f64) -> Result<Self, WeightFileError> {
        if !(a_max.is_finite() && a_max >= 0.0) {
            return Err(WeightFileError::at("a_max", format!("{a_max} must be finite and >= 0")));
        }
        if layers.is_empty() {
            return Err(WeightFileError::at("layers", "network has no layers"));
        }
        let mut width = OBS_DIM;
        for (i, layer) in layers.iter().enumerate() {
            let path = |field: &str| format!("layers[{i}].{field}");
            if layer.rows == 0 {
                return Err(WeightFileError::at(path("rows"), "must be > 0"));
            }
            if layer.cols != width {
                return Err(WeightFileError::at(
                    path("cols"),
                    format!("input width {} does not match previous output width {width}", layer.cols),
                ));
            }
            if layer.weights.len() != layer.rows * layer.cols {
                return Err(WeightFileError::at(
                    path("weights"),
                    format!(
                        "expected {} values (rows * cols), found {}",
                        layer.rows * layer.cols,
                        layer.weights.len()
                    ),
                ));
            }
            if layer.bias.len() != layer.rows {
                return Err(WeightFileError::at(
                    path("bias"),
                    format!("expected {} values, found {}", layer.rows, layer.bias.len()),
                ));
            }
            if let Some(j) = layer.weights.iter().position(|w| !w.is_finite()) {
                return Err(WeightFileError::at(format!("layers[{i}].weights[{j}]"), "non-finite value"));
            }
            if let Some(j) = layer.bias.iter().position(|w| !w.is_finite()) {
                return Err(WeightFileError::at(format!("layers[{i}].bias[{j}]"), "non-finite value"));
            }
            width = layer.rows;
        }
        if width != ACT_DIM {
            return Err(WeightFileError::at(
                format!("layers[{}].rows", layers.len() - 1),
                format!("output width {width} must equal act_dim = {ACT_DIM}"),
            ));
        }
        Ok(MlpNet { layers, a_max })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    pub fn obs_dim(&self) -> usize {
        OBS_DIM
    }

    pub fn act_dim(&self) -> usize {
        ACT_DIM
    }

    /// Network output scaled by the file's `a_max` and clamped to its norm ball.
    pub fn forward(&self, obs: &ObsVector) -> Result<Vec2> {
        self.forward_scaled(obs, self.a_max)
    }

    pub fn forward_scaled(&self, obs: &ObsVector, a_max: f64) -> Result<Vec2> {
        self.forward_slice(obs.as_slice(), a_max)
    }

    pub fn forward_slice(&self, obs: &[f64], a_max: f64) -> Result<Vec2> {
        if obs.len() != OBS_DIM {
            return Err(Error::Shape {
                expected: OBS_DIM,
                got: obs.len(),
            });
        }
        let mut cur = obs.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            layer.apply(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(clamp_acceleration(Vec2::new(cur[0], cur[1]) * a_max, a_max))
    }

    /// Serializes to the portable weight-file text.
    pub fn to_json(&self) -> String {
        let file = WeightFile {
            format_version: FORMAT_VERSION,
            obs_dim: OBS_DIM,
            act_dim: ACT_DIM,
            a_max: self.a_max,
            obs_layout: OBS_LAYOUT.to_owned(),
            layers: self.layers.clone(),
        };
        serde_json::to_string_pretty(&file).expect("weight file serializes")
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::from_str(&self.to_json()).expect("weight file round-trips")
    }
}

impl fmt::Display for MlpNet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{OBS_DIM}")?;
        for layer in &self.layers {
            write!(f, " -> {} ({:?})", layer.rows, layer.activation)?;
        }
        write!(f, ", a_max = {}", self.a_max)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightFile {
    format_version: u32,
    obs_dim: usize,
    act_dim: usize,
    a_max: f64,
    obs_layout: String,
    layers: Vec<Layer>,
}

/// Parses and validates a weight file.
pub fn load_policy(bytes: &[u8]) -> Result<MlpNet, WeightFileError> {
    let file: WeightFile = serde_json::from_slice(bytes).map_err(|e| {
        let offset = byte_offset(bytes, e.line(), e.column());
        WeightFileError::at(
            format!("line {}, column {} (byte {offset})", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    from_file(file)
}

pub fn load_policy_value(value: serde_json::Value) -> Result<MlpNet, WeightFileError> {
    let file: WeightFile =
        serde_json::from_value(value).map_err(|e| WeightFileError::at("<value>", e.to_string()))?;
    from_file(file)
}

fn from_file(file: WeightFile) -> Result<MlpNet, WeightFileError> {
    if file.format_version != FORMAT_VERSION {
        return Err(WeightFileError::at(
            "format_version",
            format!("unsupported version {}, expected {FORMAT_VERSION}", file.format_version),
        ));
    }
    if file.obs_dim != OBS_DIM {
        return Err(WeightFileError::at("obs_dim", format!("{} != {OBS_DIM}", file.obs_dim)));
    }
    if file.act_dim != ACT_DIM {
        return Err(WeightFileError::at("act_dim", format!("{} != {ACT_DIM}", file.act_dim)));
    }
    if file.obs_layout != OBS_LAYOUT {
        return Err(WeightFileError::at(
            "obs_layout",
            format!("{:?} != {OBS_LAYOUT:?}", file.obs_layout),
        ));
    }
    MlpNet::new(file.layers, file.a_max)
}

fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = bytes
        .split_inclusive(|&b| b == b'\n')
        .take(line - 1)
        .map(<[u8]>::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(bytes.len())
}
