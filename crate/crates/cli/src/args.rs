use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pursuit_core::golden::DEFAULT_SEED;
use pursuit_core::num::fmt9;
use pursuit_core::{EpisodeConfig, Scheme, Vec2, WorldParams};

use crate::path_string;

#[derive(Debug, Parser)]
#[command(name = "pursuit", version, about = "Pursuit-evasion games between damped point masses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Play one game and write its trajectory.
    Simulate(SimulateArgs),
    /// Map capture and escape zones over (a_e, a_p) and fit the boundary line.
    Sweep(SweepArgs),
    /// Refit the boundary line from a saved zone table.
    Fit(FitArgs),
    /// Emit the parity fixture shared with the trainer.
    Golden(GoldenArgs),
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("`{s}` must be a finite number >= 0"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("`{s}` must be a finite number > 0"))
    }
}

/// `x,y` pair on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point(pub f64, pub f64);

impl FromStr for Point {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (x, y) = s
            .split_once(',')
            .ok_or_else(|| format!("`{s}` is not an `x,y` pair"))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`{t}` is not a finite number"))
        };
        Ok(Point(parse(x)?, parse(y)?))
    }
}

impl From<Point> for Vec2 {
    fn from(p: Point) -> Vec2 {
        Vec2::new(p.0, p.1)
    }
}

fn pair(v: Vec2) -> String {
    format!("{},{}", fmt9(v.x), fmt9(v.y))
}

/// `baseline` or `mlp:PATH`.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    Baseline,
    Mlp(PathBuf),
}

impl FromStr for PolicySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "baseline" {
            Ok(PolicySpec::Baseline)
        } else if let Some(path) = s.strip_prefix("mlp:").filter(|p| !p.is_empty()) {
            Ok(PolicySpec::Mlp(PathBuf::from(path)))
        } else {
            Err(format!("`{s}` is neither `baseline` nor `mlp:PATH`"))
        }
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Baseline => f.write_str("baseline"),
            PolicySpec::Mlp(p) => write!(f, "mlp:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Exact,
    Euler,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Scheme {
        match s {
            SchemeArg::Exact => Scheme::ExactExponential,
            SchemeArg::Euler => Scheme::SemiImplicitEuler,
        }
    }
}

/// World, geometry and strategy flags shared by `simulate` and `sweep`.
#[derive(Debug, Args)]
pub struct GameArgs {
    /// Velocity damping coefficient (1/s).
    #[arg(long, default_value_t = 0.5, value_parser = non_negative, allow_hyphen_values = true)]
    pub mu: f64,
    /// Capture radius (m).
    #[arg(long, default_value_t = 0.5, value_parser = positive, allow_hyphen_values = true)]
    pub eps: f64,
    /// Integration step (s) [default: 0.01 for exact, 0.1 for euler].
    #[arg(long, value_parser = positive, allow_hyphen_values = true)]
    pub dt: Option<f64>,
    /// Game horizon (s).
    #[arg(long, default_value_t = 20.0, value_parser = positive, allow_hyphen_values = true)]
    pub tmax: f64,
    #[arg(long, value_enum, default_value_t = SchemeArg::Exact)]
    pub scheme: SchemeArg,
    /// Critical distance of the baseline evader (m).
    #[arg(long, value_parser = non_negative, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Initial pursuer position `x,y`.
    #[arg(long, allow_hyphen_values = true)]
    pub xp0: Option<Point>,
    /// Initial evader position `x,y` [default: 0,0].
    #[arg(long, allow_hyphen_values = true)]
    pub xe0: Option<Point>,
    /// Initial pursuer velocity `x,y` [default: 0,0].
    #[arg(long, allow_hyphen_values = true)]
    pub vp0: Option<Point>,
    /// Initial evader velocity `x,y` [default: 0,0].
    #[arg(long, allow_hyphen_values = true)]
    pub ve0: Option<Point>,
    /// Pursuer strategy: `baseline` or `mlp:PATH`.
    #[arg(long, default_value = "baseline")]
    pub pursuer: PolicySpec,
    /// Evader strategy: `baseline` or `mlp:PATH`.
    #[arg(long, default_value = "baseline")]
    pub evader: PolicySpec,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl GameArgs {
    pub fn world(&self) -> WorldParams {
        let scheme: Scheme = self.scheme.into();
        WorldParams {
            mu: self.mu,
            eps: self.eps,
            dt: self.dt.unwrap_or(scheme.default_dt()),
            t_max: self.tmax,
            scheme,
        }
    }

    pub fn resolved_json(&self, config: &EpisodeConfig, c: f64) -> Value {
        json!({
            "mu": config.world.mu,
            "eps": config.world.eps,
            "dt": config.world.dt,
            "tmax": config.world.t_max,
            "scheme": config.world.scheme,
            "c": c,
            "xp0": [config.x_p0.x, config.x_p0.y],
            "xe0": [config.x_e0.x, config.x_e0.y],
            "vp0": [config.v_p0.x, config.v_p0.y],
            "ve0": [config.v_e0.x, config.v_e0.y],
            "pursuer": self.pursuer.to_string(),
            "evader": self.evader.to_string(),
            "seed": config.seed,
        })
    }

    /// Flags reproducing `config` with every default spelled out.
    fn replay_args(&self, config: &EpisodeConfig, c: f64) -> Vec<String> {
        let scheme = match self.scheme {
            SchemeArg::Exact => "exact",
            SchemeArg::Euler => "euler",
        };
        let mut v: Vec<String> = vec![
            "--mu".into(),
            fmt9(config.world.mu),
            "--eps".into(),
            fmt9(config.world.eps),
            "--dt".into(),
            fmt9(config.world.dt),
            "--tmax".into(),
            fmt9(config.world.t_max),
            "--scheme".into(),
            scheme.into(),
            "--c".into(),
            fmt9(c),
            "--xp0".into(),
            pair(config.x_p0),
            "--xe0".into(),
            pair(config.x_e0),
            "--vp0".into(),
            pair(config.v_p0),
            "--ve0".into(),
            pair(config.v_e0),
            "--pursuer".into(),
            self.pursuer.to_string(),
            "--evader".into(),
            self.evader.to_string(),
        ];
        v.extend(["--seed".into(), config.seed.to_string()]);
        v
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Pursuer maximum thrust (m/s^2) [default: 4, or the weight file's a_max].
    #[arg(long, value_parser = non_negative, allow_hyphen_values = true)]
    pub ap: Option<f64>,
    /// Evader maximum thrust (m/s^2) [default: 2, or the weight file's a_max].
    #[arg(long, value_parser = non_negative, allow_hyphen_values = true)]
    pub ae: Option<f64>,
    /// Trajectory CSV path.
    #[arg(long, default_value = "trajectory.csv")]
    pub out: PathBuf,
    /// Optional SVG plot of both paths.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

impl SimulateArgs {
    pub fn replay_args(&self, config: &EpisodeConfig, c: f64) -> Vec<String> {
        let mut v = vec!["simulate".to_owned()];
        v.extend(self.game.replay_args(config, c));
        v.extend([
            "--ap".into(),
            fmt9(config.pursuer.a_max()),
            "--ae".into(),
            fmt9(config.evader.a_max()),
            "--out".into(),
            path_string(&self.out),
        ]);
        if let Some(svg) = &self.svg {
            v.extend(["--svg".into(), path_string(svg)]);
        }
        v
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long, default_value_t = 0.5, value_parser = non_negative, allow_hyphen_values = true)]
    pub ae_min: f64,
    #[arg(long, default_value_t = 5.0, value_parser = non_negative, allow_hyphen_values = true)]
    pub ae_max: f64,
    #[arg(long, default_value_t = 0.25, value_parser = positive, allow_hyphen_values = true)]
    pub ae_step: f64,
    #[arg(long, default_value_t = 0.5, value_parser = non_negative, allow_hyphen_values = true)]
    pub ap_min: f64,
    #[arg(long, default_value_t = 7.0, value_parser = non_negative, allow_hyphen_values = true)]
    pub ap_max: f64,
    #[arg(long, default_value_t = 0.25, value_parser = positive, allow_hyphen_values = true)]
    pub ap_step: f64,
    /// Worker threads [default: available parallelism].
    #[arg(long)]
    pub workers: Option<usize>,
    /// Zone table CSV path.
    #[arg(long, default_value = "zones.csv")]
    pub out: PathBuf,
    /// Zone map SVG path [default: the zone table path with an .svg extension].
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Also write the fit summary to this file.
    #[arg(long)]
    pub fit_out: Option<PathBuf>,
}

impl SweepArgs {
    pub fn resolved_workers(&self) -> usize {
        match self.workers {
            Some(n) if n > 0 => n,
            _ => std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }

    pub fn replay_args(&self, template: &EpisodeConfig, c: f64) -> Vec<String> {
        let mut v = vec!["sweep".to_owned()];
        v.extend(self.game.replay_args(template, c));
        for (flag, value) in [
            ("--ae-min", self.ae_min),
            ("--ae-max", self.ae_max),
            ("--ae-step", self.ae_step),
            ("--ap-min", self.ap_min),
            ("--ap-max", self.ap_max),
            ("--ap-step", self.ap_step),
        ] {
            v.extend([flag.to_owned(), fmt9(value)]);
        }
        v.extend(["--out".into(), path_string(&self.out)]);
        if let Some(svg) = &self.svg {
            v.extend(["--svg".into(), path_string(svg)]);
        }
        if let Some(fit) = &self.fit_out {
            v.extend(["--fit-out".into(), path_string(fit)]);
        }
        v
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Zone table written by `sweep`.
    pub zones: PathBuf,
}

#[derive(Debug, Args)]
pub struct GoldenArgs {
    #[arg(long, default_value = "golden.json")]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}
