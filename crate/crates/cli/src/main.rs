//! `pursuit`: run single games, sweep capture/escape zones, refit saved zone
//! tables and emit the golden parity fixture.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage error.

mod args;
mod manifest;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::Context;
use clap::Parser;
use serde_json::json;

use pursuit_core::golden::golden_fixture;
use pursuit_core::num::fmt9;
use pursuit_core::svg::{trajectory_svg, zone_svg};
use pursuit_core::zones::{fit_grid, fit_summary};
use pursuit_core::{
    load_policy, run_episode, sweep, EpisodeConfig, GridSpec, MlpNet, Outcome, Policy, ZoneGrid,
};

use args::{Cli, Command, FitArgs, GameArgs, GoldenArgs, PolicySpec, SimulateArgs, SweepArgs};
use manifest::RunManifest;

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

impl From<pursuit_core::Error> for Failure {
    fn from(e: pursuit_core::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

/// Rejections of flag values that only show up once flags are combined.
fn usage(e: pursuit_core::Error) -> Failure {
    match e {
        pursuit_core::Error::InvalidParams { .. } | pursuit_core::Error::UnstableStep { .. } => {
            Failure::Usage(e.to_string())
        }
        other => Failure::Runtime(other.into()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Fit(a) => fit_cmd(a),
        Command::Golden(a) => golden_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load_net(path: &Path) -> Result<Arc<MlpNet>, Failure> {
    let bytes = fs::read(path).with_context(|| format!("reading weight file {}", path.display()))?;
    let net = load_policy(&bytes).with_context(|| format!("loading weight file {}", path.display()))?;
    Ok(Arc::new(net))
}

/// Builds a policy for one side. `a_max` overrides a network's own budget.
fn make_policy(
    spec: &PolicySpec,
    pursuer: bool,
    a_max: Option<f64>,
    baseline_default: f64,
    c: f64,
) -> Result<Policy, Failure> {
    match spec {
        PolicySpec::Baseline => {
            let a = a_max.unwrap_or(baseline_default);
            let p = if pursuer {
                Policy::baseline_pursuit(a)
            } else {
                Policy::baseline_evasion(a, c)
            };
            p.map_err(usage)
        }
        PolicySpec::Mlp(path) => {
            let net = load_net(path)?;
            let policy = Policy::mlp(net);
            Ok(match a_max {
                Some(a) => policy.with_a_max(a),
                None => policy,
            })
        }
    }
}

fn episode_config(
    game: &GameArgs,
    pursuer: Policy,
    evader: Policy,
    default_xp0: pursuit_core::Vec2,
) -> EpisodeConfig {
    EpisodeConfig {
        world: game.world(),
        pursuer,
        evader,
        x_p0: game.xp0.map(Into::into).unwrap_or(default_xp0),
        x_e0: game.xe0.map(Into::into).unwrap_or_default(),
        v_p0: game.vp0.map(Into::into).unwrap_or_default(),
        v_e0: game.ve0.map(Into::into).unwrap_or_default(),
        seed: game.seed,
    }
}

fn write_file(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    write(&mut out).with_context(|| format!("writing {}", path.display()))?;
    out.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let c = a.game.c.unwrap_or(2.4);
    let pursuer = make_policy(&a.game.pursuer, true, a.ap, 4.0, c)?;
    let evader = make_policy(&a.game.evader, false, a.ae, 2.0, c)?;
    let config = episode_config(&a.game, pursuer, evader, (0.0, -4.0).into());
    config.validate().map_err(usage)?;

    let result = run_episode(&config)?;
    write_file(&a.out, |w| result.write_csv(w))?;
    let mut outputs = vec![a.out.clone()];
    if let Some(svg) = &a.svg {
        let title = format!(
            "a_p = {}, a_e = {}, c = {}, mu = {}",
            fmt9(config.pursuer.a_max()),
            fmt9(config.evader.a_max()),
            fmt9(c),
            fmt9(config.world.mu)
        );
        let text = trajectory_svg(&result, &title);
        write_file(svg, |w| w.write_all(text.as_bytes()))?;
        outputs.push(svg.clone());
    }

    match result.outcome {
        Outcome::Captured => println!("captured t={}", fmt9(result.capture_time.unwrap_or_default())),
        Outcome::Escaped => println!("escaped"),
    }

    let resolved = json!({
        "game": a.game.resolved_json(&config, c),
        "ap": config.pursuer.a_max(),
        "ae": config.evader.a_max(),
    });
    let replay = a.replay_args(&config, c);
    RunManifest::new("simulate", resolved, replay, outputs, started).write_beside(&a.out)?;
    Ok(())
}

fn sweep_cmd(a: SweepArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let c = a.game.c.unwrap_or(3.0);
    // thrust budgets are overwritten per cell
    let pursuer = make_policy(&a.game.pursuer, true, Some(a.ap_max), 1.0, c)?;
    let evader = make_policy(&a.game.evader, false, Some(a.ae_max), 1.0, c)?;
    let template = episode_config(&a.game, pursuer, evader, (0.0, -12.0).into());
    let spec = GridSpec {
        ae_min: a.ae_min,
        ae_max: a.ae_max,
        ae_step: a.ae_step,
        ap_min: a.ap_min,
        ap_max: a.ap_max,
        ap_step: a.ap_step,
        template,
    };
    spec.validate().map_err(usage)?;
    // the fastest cell bounds the per-step travel for every cell
    let ae_top = spec.ae_values().last().copied().unwrap_or(a.ae_max);
    let ap_top = spec.ap_values().last().copied().unwrap_or(a.ap_max);
    spec.cell_config(ae_top, ap_top).validate().map_err(usage)?;

    let workers = a.resolved_workers();
    let grid = sweep(&spec, workers)?;
    write_file(&a.out, |w| grid.write_csv(w))?;
    let svg_path = a.svg.clone().unwrap_or_else(|| a.out.with_extension("svg"));
    let fitted = fit_grid(&grid);

    let title = format!(
        "capture (green) / escape (magenta), c = {}, x_p0 = ({}, {})",
        fmt9(c),
        fmt9(spec.template.x_p0.x),
        fmt9(spec.template.x_p0.y)
    );
    let svg = zone_svg(&grid, fitted.as_ref().ok().map(|(_, f)| f), &title);
    write_file(&svg_path, |w| w.write_all(svg.as_bytes()))?;
    let mut outputs = vec![a.out.clone(), svg_path];

    let nontrivial = grid.nontrivial_escapes().len();
    let outcome = match &fitted {
        Ok((boundary, fit)) => {
            let summary = fit_summary(boundary, fit);
            print!("{summary}");
            if let Some(path) = &a.fit_out {
                write_file(path, |w| w.write_all(summary.as_bytes()))?;
                outputs.push(path.clone());
            }
            Ok(())
        }
        Err(e) => Err(e.to_string()),
    };
    println!("cells = {}, nontrivial_escapes = {nontrivial}", grid.outcomes.len());

    let resolved = json!({
        "game": a.game.resolved_json(&spec.template, c),
        "ae_min": a.ae_min, "ae_max": a.ae_max, "ae_step": a.ae_step,
        "ap_min": a.ap_min, "ap_max": a.ap_max, "ap_step": a.ap_step,
        "workers": workers,
    });
    let replay = a.replay_args(&spec.template, c);
    RunManifest::new("sweep", resolved, replay, outputs, started).write_beside(&a.out)?;
    outcome.map_err(|msg| Failure::Runtime(anyhow::anyhow!("fit failed: {msg}")))
}

fn fit_cmd(a: FitArgs) -> Result<(), Failure> {
    let file = File::open(&a.zones).with_context(|| format!("opening {}", a.zones.display()))?;
    let grid = ZoneGrid::read_csv(BufReader::new(file))
        .with_context(|| format!("reading {}", a.zones.display()))?;
    let (boundary, fit) = fit_grid(&grid)?;
    print!("{}", fit_summary(&boundary, &fit));
    Ok(())
}

fn golden_cmd(a: GoldenArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let fixture = golden_fixture(a.seed);
    let text = fixture.to_json();
    write_file(&a.out, |w| writeln!(w, "{text}"))?;
    println!(
        "wrote {} step vectors and {} network cases to {}",
        fixture.steps.len(),
        fixture.mlp_cases.len(),
        a.out.display()
    );
    let replay = vec![
        "golden".to_owned(),
        "--seed".to_owned(),
        a.seed.to_string(),
        "--out".to_owned(),
        a.out.display().to_string(),
    ];
    RunManifest::new("golden", json!({ "seed": a.seed }), replay, vec![a.out.clone()], started)
        .write_beside(&a.out)?;
    Ok(())
}

pub(crate) fn path_string(p: &PathBuf) -> String {
    p.display().to_string()
}
