//! Pinned fixtures shared with the training environment.
//!
//! The fixture holds 32 semi-implicit Euler steps at `mu = 0.5`, `dt = 0.1`
//! and 8 actor forward passes. Every input is rounded to 9 significant digits
//! before the expected output is computed from it, and outputs are rounded the
//! same way, so the file is identical on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::{clamp_acceleration, step, AgentState, Scheme, Vec2, WorldParams};
use crate::mlp::{Activation, Layer, MlpNet, ObsVector, OBS_DIM, OBS_LAYOUT};
use crate::num::round9;

pub const GOLDEN_MU: f64 = 0.5;
pub const GOLDEN_DT: f64 = 0.1;
pub const STEP_CASES: usize = 32;
pub const MLP_CASES: usize = 8;
pub const DEFAULT_SEED: u64 = 20_201_019;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepCase {
    pub pos: [f64; 2],
    pub vel: [f64; 2],
    pub accel: [f64; 2],
    pub next_pos: [f64; 2],
    pub next_vel: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MlpCase {
    pub net: serde_json::Value,
    pub obs: [f64; OBS_DIM],
    pub output: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldenFixture {
    pub format_version: u32,
    pub seed: u64,
    pub mu: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub obs_layout: &'static str,
    pub steps: Vec<StepCase>,
    pub mlp_cases: Vec<MlpCase>,
}

impl GoldenFixture {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("fixture serializes")
    }
}

fn pair(v: Vec2) -> [f64; 2] {
    [v.x, v.y]
}

fn rounded(v: Vec2) -> Vec2 {
    Vec2::new(round9(v.x), round9(v.y))
}

fn world() -> WorldParams {
    WorldParams {
        mu: GOLDEN_MU,
        dt: GOLDEN_DT,
        scheme: Scheme::SemiImplicitEuler,
        ..WorldParams::default()
    }
}

fn step_case(pos: Vec2, vel: Vec2, accel: Vec2) -> StepCase {
    let (pos, vel, accel) = (rounded(pos), rounded(vel), rounded(accel));
    let next = step(AgentState::new(pos, vel), accel, &world()).expect("mu * dt < 1");
    StepCase {
        pos: pair(pos),
        vel: pair(vel),
        accel: pair(accel),
        next_pos: pair(rounded(next.pos)),
        next_vel: pair(rounded(next.vel)),
    }
}

fn uniform_vec(rng: &mut ChaCha8Rng, half_width: f64) -> Vec2 {
    Vec2::new(
        rng.gen_range(-half_width..half_width),
        rng.gen_range(-half_width..half_width),
    )
}

fn random_layer(rng: &mut ChaCha8Rng, rows: usize, cols: usize, activation: Activation) -> Layer {
    let bound = 1.0 / (cols as f64).sqrt();
    let mut draw = |n: usize| -> Vec<f64> {
        (0..n).map(|_| round9(rng.gen_range(-bound..bound))).collect()
    };
    let weights = draw(rows * cols);
    let bias = draw(rows);
    Layer {
        rows,
        cols,
        weights,
        bias,
        activation,
    }
}

fn exporter_net(rng: &mut ChaCha8Rng, a_max: f64) -> MlpNet {
    MlpNet::new(
        vec![
            random_layer(rng, 64, OBS_DIM, Activation::Relu),
            random_layer(rng, 64, 64, Activation::Relu),
            random_layer(rng, 2, 64, Activation::Tanh),
        ],
        a_max,
    )
    .expect("well-formed random net")
}

pub fn golden_fixture(seed: u64) -> GoldenFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut steps = vec![
        step_case(Vec2::ZERO, Vec2::ZERO, Vec2::new(4.0, 0.0)),
        step_case(Vec2::new(1.5, -2.0), Vec2::ZERO, Vec2::ZERO),
    ];
    while steps.len() < STEP_CASES {
        let pos = uniform_vec(&mut rng, 12.0);
        let vel = clamp_acceleration(uniform_vec(&mut rng, 8.0), 8.0);
        let accel = clamp_acceleration(uniform_vec(&mut rng, 4.0), 4.0);
        steps.push(step_case(pos, vel, accel));
    }

    let zero = MlpNet::new(
        vec![
            Layer::zeros(64, OBS_DIM, Activation::Relu),
            Layer::zeros(64, 64, Activation::Relu),
            Layer::zeros(2, 64, Activation::Tanh),
        ],
        4.0,
    )
    .expect("zero net");
    let mut selector = Layer::zeros(2, OBS_DIM, Activation::Identity);
    selector.weights[2] = 1.0;
    let selector = MlpNet::new(vec![selector], 1.0).expect("selector net");

    let mut nets = vec![zero, selector];
    let budgets = [4.0, 2.4, 2.0, 3.0, 1.5, 5.0];
    for &a_max in budgets.iter().take(MLP_CASES - nets.len()) {
        nets.push(exporter_net(&mut rng, a_max));
    }

    let mlp_cases = nets
        .into_iter()
        .map(|net| {
            let mut obs = [0.0; OBS_DIM];
            for x in &mut obs {
                *x = round9(rng.gen_range(-12.0..12.0));
            }
            let out = net.forward(&ObsVector(obs)).expect("fixed width");
            MlpCase {
                net: net.to_value(),
                obs,
                output: pair(rounded(out)),
            }
        })
        .collect();

    GoldenFixture {
        format_version: 1,
        seed,
        mu: GOLDEN_MU,
        dt: GOLDEN_DT,
        scheme: Scheme::SemiImplicitEuler,
        obs_layout: OBS_LAYOUT,
        steps,
        mlp_cases,
    }
}
