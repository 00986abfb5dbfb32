//! Invariant checks and reference integrators shared by the property suite and
//! the acceptance suite. Nothing here calls the engine's integrator to compute
//! an expected value.
#![allow(dead_code)]

use std::sync::Arc;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

use pursuit_core::dynamics::step;
use pursuit_core::episode::{reward, run_episode, EpisodeConfig, Outcome};
use pursuit_core::mlp::{Activation, Layer, MlpNet, ObsVector};
use pursuit_core::strategies::{
    baseline_evasion, baseline_pursuit, perpendicular_turn, GameObservation,
};
use pursuit_core::zones::{sweep, GridSpec};
use pursuit_core::{clamp_acceleration, AgentState, Policy, Scheme, Vec2, WorldParams};

pub const CASES: u32 = 1000;

pub fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x5eed_2021),
        failure_persistence: None,
        ..Config::default()
    }
}

pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

pub fn exact(mu: f64, dt: f64) -> WorldParams {
    WorldParams {
        mu,
        dt,
        t_max: 1e6,
        ..WorldParams::default()
    }
}

pub fn case_one() -> EpisodeConfig {
    EpisodeConfig::at_rest(
        Policy::baseline_pursuit(4.0).unwrap(),
        Policy::baseline_evasion(2.0, 2.4).unwrap(),
        Vec2::new(0.0, -4.0),
        Vec2::ZERO,
    )
}

pub fn case_two() -> EpisodeConfig {
    EpisodeConfig::at_rest(
        Policy::baseline_pursuit(4.0).unwrap(),
        Policy::baseline_evasion(2.4, 2.4).unwrap(),
        Vec2::new(0.0, -4.0),
        Vec2::ZERO,
    )
}

// ---------------------------------------------------------------------------
// Reference integrators

/// Classical RK4 on `x'' = -mu x' + a` with `a` held constant.
pub fn rk4(state: AgentState, a: Vec2, mu: f64, h: f64) -> AgentState {
    let f = |_x: Vec2, v: Vec2| (v, a - v * mu);
    let (x, v) = (state.pos, state.vel);
    let (k1x, k1v) = f(x, v);
    let (k2x, k2v) = f(x + k1x * (h / 2.0), v + k1v * (h / 2.0));
    let (k3x, k3v) = f(x + k2x * (h / 2.0), v + k2v * (h / 2.0));
    let (k4x, k4v) = f(x + k3x * h, v + k3v * h);
    AgentState::new(
        x + (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (h / 6.0),
        v + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0),
    )
}

/// Integrates over `duration` with `substeps` RK4 steps.
pub fn rk4_over(mut s: AgentState, a: Vec2, mu: f64, duration: f64, substeps: usize) -> AgentState {
    let h = duration / substeps as f64;
    for _ in 0..substeps {
        s = rk4(s, a, mu, h);
    }
    s
}

/// Closed-form speed after free decay.
pub fn decayed_speed(v0: f64, mu: f64, t: f64) -> f64 {
    v0 * (-mu * t).exp()
}

// ---------------------------------------------------------------------------
// Strategies

pub fn vec2(r: f64) -> impl Strategy<Value = Vec2> {
    (-r..r, -r..r).prop_map(|(x, y)| Vec2::new(x, y))
}

pub fn unit() -> impl Strategy<Value = Vec2> {
    (0.0..std::f64::consts::TAU).prop_map(|t| Vec2::new(t.cos(), t.sin()))
}

pub fn state(r: f64, v: f64) -> impl Strategy<Value = AgentState> {
    (vec2(r), vec2(v)).prop_map(|(p, v)| AgentState::new(p, v))
}

pub fn scheme() -> impl Strategy<Value = Scheme> {
    prop_oneof![Just(Scheme::ExactExponential), Just(Scheme::SemiImplicitEuler)]
}

pub fn separated_obs() -> impl Strategy<Value = GameObservation> {
    (vec2(15.0), vec2(15.0), vec2(8.0), vec2(8.0))
        .prop_filter("agents must be separated", |(p, e, _, _)| (*p - *e).norm() > 1e-3)
        .prop_map(|(x_p, x_e, v_p, v_e)| GameObservation { x_p, x_e, v_p, v_e })
}

fn layer(rows: usize, cols: usize, act: Activation, scale: f64) -> impl Strategy<Value = Layer> {
    (
        proptest::collection::vec(-scale..scale, rows * cols),
        proptest::collection::vec(-scale..scale, rows),
    )
        .prop_map(move |(weights, bias)| Layer {
            rows,
            cols,
            weights,
            bias,
            activation: act,
        })
}

fn activation() -> impl Strategy<Value = Activation> {
    prop_oneof![Just(Activation::Relu), Just(Activation::Tanh), Just(Activation::Identity)]
}

/// Random nets of 1 to 3 layers with random widths and activations.
pub fn net() -> impl Strategy<Value = MlpNet> {
    (1usize..=3, 1usize..=12, 1usize..=12, activation(), activation(), activation(), 0.0..8.0)
        .prop_flat_map(|(depth, h1, h2, a1, a2, a3, a_max)| {
            let layers: Vec<BoxedStrategy<Layer>> = match depth {
                1 => vec![layer(2, 8, a3, 3.0).boxed()],
                2 => vec![layer(h1, 8, a1, 3.0).boxed(), layer(2, h1, a3, 3.0).boxed()],
                _ => vec![
                    layer(h1, 8, a1, 3.0).boxed(),
                    layer(h2, h1, a2, 3.0).boxed(),
                    layer(2, h2, a3, 3.0).boxed(),
                ],
            };
            (layers, Just(a_max))
        })
        .prop_map(|(layers, a_max)| MlpNet::new(layers, a_max).expect("consistent widths"))
}

pub fn obs_vector() -> impl Strategy<Value = ObsVector> {
    proptest::array::uniform8(-15.0..15.0f64).prop_map(ObsVector)
}

/// Baseline games with random thrusts, geometry and a short horizon.
pub fn baseline_game() -> impl Strategy<Value = EpisodeConfig> {
    (0.5..6.0, 0.0..4.0, 0.0..4.0, 2.0..8.0f64, unit(), vec2(1.0), 0.2..1.0)
        .prop_map(|(a_p, a_e, c, dist, dir, v_p0, mu)| EpisodeConfig {
            world: WorldParams {
                mu,
                t_max: 4.0,
                ..WorldParams::default()
            },
            pursuer: Policy::baseline_pursuit(a_p).unwrap(),
            evader: Policy::baseline_evasion(a_e, c).unwrap(),
            x_p0: dir * -dist,
            x_e0: Vec2::ZERO,
            v_p0,
            v_e0: Vec2::ZERO,
            seed: 7,
        })
        .prop_filter("per-step travel must stay below eps/2", |c| c.validate().is_ok())
}

// ---------------------------------------------------------------------------
// Invariants

/// `‖v‖ = ‖v0‖ e^(-mu n dt)` under zero thrust.
pub fn free_decay(s: AgentState, mu: f64, dt: f64, n: usize) -> Result<(), TestCaseError> {
    let params = exact(mu, dt);
    let mut cur = s;
    for _ in 0..n {
        cur = step(cur, Vec2::ZERO, &params).unwrap();
    }
    let expected = decayed_speed(s.vel.norm(), mu, n as f64 * dt);
    let got = cur.vel.norm();
    ensure((got - expected).abs() <= 1e-10 * expected.max(1e-300), || {
        format!("speed {got} vs closed form {expected}")
    })
}

/// Speed under constant full thrust reaches `a_max / mu` after `40 / mu` seconds.
pub fn terminal_speed(a_max: f64, mu: f64, dir: Vec2) -> Result<(), TestCaseError> {
    let dt = 0.05;
    let params = exact(mu, dt);
    let n = (40.0 / mu / dt).ceil() as usize;
    let mut s = AgentState::default();
    for _ in 0..n {
        s = step(s, dir * a_max, &params).unwrap();
    }
    let terminal = a_max / mu;
    ensure((s.vel.norm() - terminal).abs() < 1e-6 * terminal, || {
        format!("speed {} vs terminal {terminal}", s.vel.norm())
    })
}

/// One exact step of `dt` equals two of `dt / 2`.
pub fn semigroup(s: AgentState, a: Vec2, mu: f64, dt: f64) -> Result<(), TestCaseError> {
    let one = step(s, a, &exact(mu, dt)).unwrap();
    let half = exact(mu, dt / 2.0);
    let two = step(step(s, a, &half).unwrap(), a, &half).unwrap();
    for (u, w) in [(one.pos, two.pos), (one.vel, two.vel)] {
        ensure((u.x - w.x).abs() < 1e-12 && (u.y - w.y).abs() < 1e-12, || {
            format!("{one:?} vs {two:?}")
        })?;
    }
    Ok(())
}

pub fn step_equivariance(
    s: AgentState,
    a: Vec2,
    mu: f64,
    dt: f64,
    scheme: Scheme,
    angle: f64,
) -> Result<(), TestCaseError> {
    let params = WorldParams {
        mu,
        dt,
        t_max: 1e6,
        scheme,
        ..WorldParams::default()
    };
    let lhs = step(s.rotated(angle), a.rotated(angle), &params).unwrap();
    let rhs = step(s, a, &params).unwrap().rotated(angle);
    for (u, w) in [(lhs.pos, rhs.pos), (lhs.vel, rhs.vel)] {
        ensure((u.x - w.x).abs() < 1e-12 && (u.y - w.y).abs() < 1e-12, || {
            format!("rotated step {lhs:?} vs step rotated {rhs:?}")
        })?;
    }
    Ok(())
}

pub fn clamping(a: Vec2, a_max: f64) -> Result<(), TestCaseError> {
    let c = clamp_acceleration(a, a_max);
    ensure(c.norm() <= a_max + 1e-12, || format!("{c:?} exceeds {a_max}"))?;
    if a.norm() <= a_max {
        ensure(c == a, || "inside the ball must be unchanged".into())?;
    } else {
        // same direction
        ensure((c.x * a.y - c.y * a.x).abs() < 1e-9 * a.norm().max(1.0) && c.dot(a) >= 0.0, || {
            "clamping changed direction".into()
        })?;
    }
    Ok(())
}

pub fn perpendicular_orthonormal(d: Vec2, v: Vec2) -> Result<(), TestCaseError> {
    let n = perpendicular_turn(d, v).unwrap();
    ensure(n.dot(d).abs() < 1e-12 && (n.norm() - 1.0).abs() < 1e-12, || {
        format!("n = {n:?} for d = {d:?}")
    })
}

pub fn baseline_full_thrust(o: &GameObservation, a: f64, c: f64) -> Result<(), TestCaseError> {
    let p = baseline_pursuit(o, a).unwrap();
    let e = baseline_evasion(o, a, c).unwrap();
    ensure((p.norm() - a).abs() < 1e-12 && (e.norm() - a).abs() < 1e-12, || {
        format!("norms {} {} vs {a}", p.norm(), e.norm())
    })
}

/// Euler-vs-exact end-state error after `duration` of constant thrust.
pub fn euler_error(s: AgentState, a: Vec2, mu: f64, dt: f64, duration: f64) -> f64 {
    let n = (duration / dt).round() as usize;
    let euler = WorldParams {
        scheme: Scheme::SemiImplicitEuler,
        ..exact(mu, dt)
    };
    let mut x = s;
    for _ in 0..n {
        x = step(x, a, &euler).unwrap();
    }
    let y = step(s, a, &exact(mu, duration)).unwrap();
    (x.pos - y.pos).norm().max((x.vel - y.vel).norm())
}

/// Halving dt at least halves the Euler error, for dt from 0.1 down.
pub fn euler_converges(s: AgentState, a: Vec2, mu: f64, duration: f64) -> Result<(), TestCaseError> {
    for dt in [0.1, 0.05, 0.025] {
        let coarse = euler_error(s, a, mu, dt, duration);
        let fine = euler_error(s, a, mu, dt / 2.0, duration);
        ensure(fine <= 0.5 * coarse, || format!("dt {dt}: {coarse} -> {fine}"))?;
    }
    Ok(())
}

/// Rotating the observation rotates both baseline outputs. Cases that sit on
/// the evader's branch boundary or on a turn-direction tie are skipped since
/// rounding can legitimately pick the other side there.
pub fn baseline_equivariance(o: &GameObservation, a: f64, c: f64, angle: f64) -> Result<(), TestCaseError> {
    let d = (o.x_e - o.x_p) / o.separation();
    if (o.separation() - c).abs() < 1e-9 || d.perp().dot(o.v_p).abs() < 1e-9 {
        return Ok(());
    }
    let r = o.rotated(angle);
    let pairs = [
        (baseline_pursuit(&r, a).unwrap(), baseline_pursuit(o, a).unwrap()),
        (baseline_evasion(&r, a, c).unwrap(), baseline_evasion(o, a, c).unwrap()),
    ];
    for (rotated_in, plain) in pairs {
        let rotated_out = plain.rotated(angle);
        ensure((rotated_in - rotated_out).norm() < 1e-12 * a.max(1.0), || {
            format!("{rotated_in:?} vs {rotated_out:?}")
        })?;
    }
    Ok(())
}

pub fn zero_sum_reward(x_p: Vec2, x_e: Vec2, eps: f64) -> Result<(), TestCaseError> {
    let (r_e, r_p) = reward(x_p, x_e, eps);
    ensure(r_e + r_p == 0.0, || format!("{r_e} + {r_p} != 0"))?;
    let sep = (x_p - x_e).norm();
    if sep <= eps {
        ensure(r_e == -10.0, || "capture reward".into())
    } else {
        ensure((r_e - 0.1 * sep).abs() <= 1e-15 * sep.max(1.0), || "distance reward".into())
    }
}

pub fn mlp_bound(net: &MlpNet, x: &ObsVector) -> Result<(), TestCaseError> {
    let out = net.forward(x).unwrap();
    ensure(out.norm() <= net.a_max() + 1e-9, || {
        format!("{out:?} exceeds {}", net.a_max())
    })
}

pub fn mlp_determinism(net: &MlpNet, x: &ObsVector) -> Result<(), TestCaseError> {
    let reloaded = pursuit_core::load_policy(net.to_json().as_bytes()).unwrap();
    let a = net.forward(x).unwrap();
    let b = reloaded.forward(x).unwrap();
    let c = net.forward(x).unwrap();
    ensure(
        a.x.to_bits() == b.x.to_bits()
            && a.y.to_bits() == b.y.to_bits()
            && a.x.to_bits() == c.x.to_bits()
            && a.y.to_bits() == c.y.to_bits(),
        || format!("{a:?} / {b:?} / {c:?}"),
    )
}

/// Two runs of the same config agree bit for bit, including learned policies.
pub fn episode_determinism(cfg: &EpisodeConfig) -> Result<(), TestCaseError> {
    let a = run_episode(cfg).unwrap();
    let b = run_episode(cfg).unwrap();
    ensure(a == b, || "repeated episode differs".into())?;
    let same_bits = a.trajectory.iter().zip(&b.trajectory).all(|(r, s)| {
        r.x_p.x.to_bits() == s.x_p.x.to_bits() && r.x_e.y.to_bits() == s.x_e.y.to_bits()
    });
    ensure(same_bits, || "bitwise mismatch".into())
}

/// Rewards sum as logged, pursuer rewards negate them, and each logged
/// reward matches the logged positions.
pub fn episode_bookkeeping(cfg: &EpisodeConfig) -> Result<(), TestCaseError> {
    let r = run_episode(cfg).unwrap();
    let eps = cfg.world.eps;
    let mut sum_e = 0.0;
    let mut sum_p = 0.0;
    for row in &r.trajectory {
        let (r_e, r_p) = reward(row.x_p, row.x_e, eps);
        ensure(row.r_e == r_e, || format!("logged {} vs recomputed {r_e}", row.r_e))?;
        sum_e += r_e;
        sum_p += r_p;
    }
    ensure(r.cumulative_r_e == sum_e && sum_p == -sum_e, || {
        format!("cumulative {} vs {sum_e} / {sum_p}", r.cumulative_r_e)
    })?;
    for w in r.trajectory.windows(2) {
        ensure((w[1].t - w[0].t - cfg.world.dt).abs() < 1e-9 && w[1].t > w[0].t, || {
            "timestamps must advance by dt".into()
        })?;
    }
    match r.outcome {
        Outcome::Captured => ensure(r.final_row().separation() <= eps, || "capture separation".into())?,
        Outcome::Escaped => {
            ensure(r.trajectory.iter().all(|row| row.separation() > eps), || {
                "escape passed within eps".into()
            })?;
            ensure(r.final_row().t >= cfg.world.t_max - 1e-9, || "escape ended early".into())?;
        }
    }
    Ok(())
}

/// Extending the horizon past a capture does not move it.
pub fn earliest_capture(cfg: &EpisodeConfig, extra: f64) -> Result<(), TestCaseError> {
    let r = run_episode(cfg).unwrap();
    let Some(t1) = r.capture_time else {
        return Ok(());
    };
    for t_max in [t1, t1 + extra] {
        let mut longer = cfg.clone();
        longer.world.t_max = t_max;
        let s = run_episode(&longer).unwrap();
        ensure(s.capture_time == Some(t1), || {
            format!("t_max {t_max}: capture {:?} vs {t1}", s.capture_time)
        })?;
    }
    Ok(())
}

pub fn episode_equivariance(cfg: &EpisodeConfig, angle: f64) -> Result<(), TestCaseError> {
    let plain = run_episode(cfg).unwrap();
    let turned = run_episode(&cfg.rotated(angle)).unwrap();
    ensure(plain.outcome == turned.outcome && plain.capture_time == turned.capture_time, || {
        format!(
            "outcome {:?}/{:?}, capture {:?}/{:?}",
            plain.outcome, turned.outcome, plain.capture_time, turned.capture_time
        )
    })?;
    for (a, b) in plain.trajectory.iter().zip(&turned.trajectory) {
        for (u, w) in [
            (a.x_p.rotated(angle), b.x_p),
            (a.x_e.rotated(angle), b.x_e),
            (a.v_p.rotated(angle), b.v_p),
            (a.v_e.rotated(angle), b.v_e),
        ] {
            ensure((u.x - w.x).abs() < 1e-9 && (u.y - w.y).abs() < 1e-9, || {
                format!("t = {}: {u:?} vs {w:?}", a.t)
            })?;
        }
    }
    Ok(())
}

/// Small sweeps agree bit for bit on 1 and `workers` threads.
pub fn worker_independence(spec: &GridSpec, workers: usize) -> Result<(), TestCaseError> {
    let one = sweep(spec, 1).unwrap();
    let many = sweep(spec, workers).unwrap();
    ensure(one == many, || format!("1 worker vs {workers} workers differ"))
}

pub fn small_grid() -> impl Strategy<Value = (GridSpec, usize)> {
    (0.0..3.0, 0.1..1.5, 0.0..4.0, 0.1..1.5, 0.0..4.0, 3.0..8.0f64, 2usize..8)
        .prop_map(|(ae_min, ae_step, ap_min, ap_step, c, dist, workers)| {
            let mut spec = GridSpec::baseline();
            spec.ae_min = ae_min;
            spec.ae_step = ae_step;
            spec.ae_max = ae_min + 2.0 * ae_step;
            spec.ap_min = ap_min;
            spec.ap_step = ap_step;
            spec.ap_max = ap_min + 2.0 * ap_step;
            spec.template.evader = Policy::BaselineEvasion { a_max: 1.0, c };
            spec.template.x_p0 = Vec2::new(0.0, -dist);
            spec.template.world.t_max = 3.0;
            (spec, workers)
        })
}

/// A zero-bias net with small random weights, as a learned policy for episodes.
pub fn learned_policy(seed: u64, a_max: f64) -> Policy {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut layer = |rows: usize, cols: usize, act| Layer {
        rows,
        cols,
        weights: (0..rows * cols).map(|_| rng.gen_range(-0.5..0.5)).collect(),
        bias: vec![0.0; rows],
        activation: act,
    };
    let layers = vec![
        layer(16, 8, Activation::Relu),
        layer(16, 16, Activation::Relu),
        layer(2, 16, Activation::Tanh),
    ];
    Policy::mlp(Arc::new(MlpNet::new(layers, a_max).unwrap()))
}
