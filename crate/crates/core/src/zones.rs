//! Capture/escape zone maps over the `(a_e, a_p)` plane and the fitted
//! phase-transition line separating them.
//!
//! Every grid cell is an independent episode. Cells are farmed out to a
//! worker pool and written back by index, so the map never depends on the
//! worker count or on completion order.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::dynamics::Vec2;
use crate::episode::{run_episode, EpisodeConfig, Outcome};
use crate::error::{Error, Result};
use crate::num::{fmt9, round9};
use crate::strategies::Policy;

pub const ZONE_HEADER: &str = "ae,ap,outcome,capture_time";

/// Axis ranges plus the episode every cell is instantiated from.
#[derive(Debug, Clone)]
pub struct GridSpec {
    pub ae_min: f64,
    pub ae_max: f64,
    pub ae_step: f64,
    pub ap_min: f64,
    pub ap_max: f64,
    pub ap_step: f64,
    pub template: EpisodeConfig,
}

impl GridSpec {
    /// Default axes (`a_e` in [0.5, 5], `a_p` in [0.5, 7], step 0.25) around
    /// the given template.
    pub fn with_template(template: EpisodeConfig) -> Self {
        GridSpec {
            ae_min: 0.5,
            ae_max: 5.0,
            ae_step: 0.25,
            ap_min: 0.5,
            ap_max: 7.0,
            ap_step: 0.25,
            template,
        }
    }

    /// Baseline pursuer against the baseline evader with critical distance 3,
    /// starting 12 m apart at rest, `mu = eps = 0.5`, 20 s horizon.
    pub fn baseline() -> Self {
        let template = EpisodeConfig::at_rest(
            Policy::BaselinePursuit { a_max: 1.0 },
            Policy::BaselineEvasion { a_max: 1.0, c: 3.0 },
            Vec2::new(0.0, -12.0),
            Vec2::ZERO,
        );
        GridSpec::with_template(template)
    }

    pub fn validate(&self) -> Result<()> {
        check_axis("ae", self.ae_min, self.ae_max, self.ae_step)?;
        check_axis("ap", self.ap_min, self.ap_max, self.ap_step)?;
        if self.ae_min < 0.0 {
            return Err(Error::invalid("ae_min", "thrust must be >= 0"));
        }
        if self.ap_min < 0.0 {
            return Err(Error::invalid("ap_min", "thrust must be >= 0"));
        }
        Ok(())
    }

    pub fn ae_values(&self) -> Vec<f64> {
        axis(self.ae_min, self.ae_max, self.ae_step)
    }

    pub fn ap_values(&self) -> Vec<f64> {
        axis(self.ap_min, self.ap_max, self.ap_step)
    }

    /// The template with both thrust budgets replaced.
    pub fn cell_config(&self, ae: f64, ap: f64) -> EpisodeConfig {
        EpisodeConfig {
            pursuer: self.template.pursuer.with_a_max(ap),
            evader: self.template.evader.with_a_max(ae),
            ..self.template.clone()
        }
    }
}

fn check_axis(name: &'static str, min: f64, max: f64, step: f64) -> Result<()> {
    if !(min.is_finite() && max.is_finite() && step.is_finite()) {
        return Err(Error::invalid(name, "axis bounds must be finite"));
    }
    if step <= 0.0 {
        return Err(Error::invalid(name, format!("step {step} must be > 0")));
    }
    if min >= max {
        return Err(Error::invalid(name, format!("min {min} must be < max {max}")));
    }
    if axis(min, max, step).len() < 2 {
        return Err(Error::invalid(name, "axis must have at least 2 values"));
    }
    Ok(())
}

/// `min, min + step, ...` up to `max`, rounded so the values survive a text
/// round trip unchanged.
fn axis(min: f64, max: f64, step: f64) -> Vec<f64> {
    let n = ((max - min) / step + 1e-9).floor() as usize + 1;
    (0..n).map(|i| round9(min + i as f64 * step)).collect()
}

/// Outcome of every cell, stored column-major: all `a_p` values of the first
/// `a_e` column come first.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneGrid {
    pub ae: Vec<f64>,
    pub ap: Vec<f64>,
    pub outcomes: Vec<Outcome>,
    pub capture_times: Vec<Option<f64>>,
}

impl ZoneGrid {
    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        i * self.ap.len() + j
    }

    /// Outcome at column `i` (`a_e`) and row `j` (`a_p`).
    pub fn outcome(&self, i: usize, j: usize) -> Outcome {
        self.outcomes[self.index(i, j)]
    }

    pub fn capture_time(&self, i: usize, j: usize) -> Option<f64> {
        self.capture_times[self.index(i, j)]
    }

    pub fn column(&self, i: usize) -> &[Outcome] {
        let n = self.ap.len();
        &self.outcomes[i * n..(i + 1) * n]
    }

    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, Outcome, Option<f64>)> + '_ {
        self.ae.iter().enumerate().flat_map(move |(i, &ae)| {
            self.ap
                .iter()
                .enumerate()
                .map(move |(j, &ap)| (ae, ap, self.outcome(i, j), self.capture_time(i, j)))
        })
    }

    /// Cells where the pursuer has more thrust yet the evader escapes.
    pub fn nontrivial_escapes(&self) -> Vec<(f64, f64)> {
        self.cells()
            .filter(|&(ae, ap, o, _)| ap > ae && o == Outcome::Escaped)
            .map(|(ae, ap, _, _)| (ae, ap))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{ZONE_HEADER}")?;
        for (ae, ap, outcome, t) in self.cells() {
            let t = t.map(fmt9).unwrap_or_default();
            writeln!(out, "{},{},{},{t}", fmt9(ae), fmt9(ap), outcome.as_str())?;
        }
        Ok(())
    }

    /// Rebuilds a grid from its CSV export. Rows may come in any order but
    /// must cover the full `a_e` x `a_p` product exactly once.
    pub fn read_csv<R: BufRead>(input: R) -> Result<ZoneGrid> {
        let mut rows = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (line_no == 1 && line == ZONE_HEADER) {
                continue;
            }
            let parse_err = |reason: String| Error::ZoneParse {
                line: line_no,
                reason,
            };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(parse_err(format!("expected 4 fields, found {}", fields.len())));
            }
            let num = |s: &str, what: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(format!("bad {what} value {s:?}")))
            };
            let ae = num(fields[0], "ae")?;
            let ap = num(fields[1], "ap")?;
            let outcome = match fields[2].trim() {
                "captured" => Outcome::Captured,
                "escaped" => Outcome::Escaped,
                other => return Err(parse_err(format!("unknown outcome {other:?}"))),
            };
            let t = match fields[3].trim() {
                "" => None,
                s => Some(num(s, "capture_time")?),
            };
            if (outcome == Outcome::Captured) != t.is_some() {
                return Err(parse_err("capture_time must be present exactly for captured cells".into()));
            }
            rows.push((line_no, ae, ap, outcome, t));
        }

        let mut ae: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let mut ap: Vec<f64> = rows.iter().map(|r| r.2).collect();
        for axis in [&mut ae, &mut ap] {
            axis.sort_by(f64::total_cmp);
            axis.dedup();
        }
        let mut outcomes: Vec<Option<Outcome>> = vec![None; ae.len() * ap.len()];
        let mut capture_times = vec![None; ae.len() * ap.len()];
        for (line, a_e, a_p, outcome, t) in rows {
            let i = ae.binary_search_by(|v| v.total_cmp(&a_e)).expect("value on axis");
            let j = ap.binary_search_by(|v| v.total_cmp(&a_p)).expect("value on axis");
            let k = i * ap.len() + j;
            if outcomes[k].is_some() {
                return Err(Error::ZoneParse {
                    line,
                    reason: format!("duplicate cell ({a_e}, {a_p})"),
                });
            }
            outcomes[k] = Some(outcome);
            capture_times[k] = t;
        }
        if let Some(k) = outcomes.iter().position(Option::is_none) {
            return Err(Error::ZoneParse {
                line: 0,
                reason: format!(
                    "missing cell ({}, {}); the table must cover the full grid",
                    ae[k / ap.len()],
                    ap[k % ap.len()]
                ),
            });
        }
        Ok(ZoneGrid {
            ae,
            ap,
            outcomes: outcomes.into_iter().map(Option::unwrap).collect(),
            capture_times,
        })
    }
}

/// Runs every cell of `spec` on `workers` threads (0 = all available cores).
pub fn sweep(spec: &GridSpec, workers: usize) -> Result<ZoneGrid> {
    spec.validate()?;
    let ae = spec.ae_values();
    let ap = spec.ap_values();
    let cells: Vec<(f64, f64)> = ae
        .iter()
        .flat_map(|&a_e| ap.iter().map(move |&a_p| (a_e, a_p)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))?;
    let results: Vec<Result<(Outcome, Option<f64>)>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(a_e, a_p)| {
                run_episode(&spec.cell_config(a_e, a_p))
                    .map(|r| (r.outcome, r.capture_time))
                    .map_err(|e| Error::Cell {
                        ae: a_e,
                        ap: a_p,
                        source: Box::new(e),
                    })
            })
            .collect()
    });

    let mut outcomes = Vec::with_capacity(cells.len());
    let mut capture_times = Vec::with_capacity(cells.len());
    for r in results {
        let (o, t) = r?;
        outcomes.push(o);
        capture_times.push(t);
    }
    Ok(ZoneGrid {
        ae,
        ap,
        outcomes,
        capture_times,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExclusionReason {
    AllEscaped,
    AllCaptured,
    /// The top row escapes, so there is no captured suffix, yet some cell below is captured.
    NoCapturedSuffix,
}

impl ExclusionReason {
    fn describe(self) -> &'static str {
        match self {
            ExclusionReason::AllEscaped => "all escaped",
            ExclusionReason::AllCaptured => "all captured",
            ExclusionReason::NoCapturedSuffix => "no captured suffix",
        }
    }
}

/// Boundary points per usable column, plus what was left out and why.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Boundary {
    pub points: Vec<(f64, f64)>,
    pub excluded: Vec<(f64, ExclusionReason)>,
    /// Captured cells below a column's captured suffix.
    pub anomalies: Vec<(f64, f64)>,
}

/// Per `a_e` column, the lowest `a_p` of the longest run of captured cells
/// reaching the top of the column.
pub fn extract_boundary(grid: &ZoneGrid) -> Result<Boundary> {
    let mut boundary = Boundary::default();
    for (i, &ae) in grid.ae.iter().enumerate() {
        let column = grid.column(i);
        let start = column.len()
            - column
                .iter()
                .rev()
                .take_while(|&&o| o == Outcome::Captured)
                .count();
        for (j, &o) in column[..start].iter().enumerate() {
            if o == Outcome::Captured {
                boundary.anomalies.push((ae, grid.ap[j]));
            }
        }
        if start == 0 {
            boundary.excluded.push((ae, ExclusionReason::AllCaptured));
        } else if start == column.len() {
            let reason = if column.contains(&Outcome::Captured) {
                ExclusionReason::NoCapturedSuffix
            } else {
                ExclusionReason::AllEscaped
            };
            boundary.excluded.push((ae, reason));
        } else {
            boundary.points.push((ae, grid.ap[start]));
        }
    }
    if boundary.points.len() < 2 {
        return Err(Error::NoBoundary {
            usable: boundary.points.len(),
        });
    }
    Ok(boundary)
}

/// Least-squares line `a_p = slope * a_e + intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub boundary_points: Vec<(f64, f64)>,
    pub residual_rms: f64,
}

impl LineFit {
    pub fn predict(&self, ae: f64) -> f64 {
        self.slope * ae + self.intercept
    }
}

/// Ordinary least squares on vertical residuals.
pub fn fit_phase_line(points: &[(f64, f64)]) -> Result<LineFit> {
    if points.is_empty() {
        return Err(Error::NoBoundary { usable: 0 });
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if points.iter().all(|p| p.0 == points[0].0) || sxx == 0.0 {
        return Err(Error::DegenerateFit { ae: points[0].0 });
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = points
        .iter()
        .map(|&(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    Ok(LineFit {
        slope,
        intercept,
        boundary_points: points.to_vec(),
        residual_rms: (sse / n).sqrt(),
    })
}

/// Boundary extraction followed by the line fit.
pub fn fit_grid(grid: &ZoneGrid) -> Result<(Boundary, LineFit)> {
    let boundary = extract_boundary(grid)?;
    let fit = fit_phase_line(&boundary.points)?;
    Ok((boundary, fit))
}

/// Plain-text fit report.
pub fn fit_summary(boundary: &Boundary, fit: &LineFit) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "slope = {}", fmt9(fit.slope));
    let _ = writeln!(s, "intercept = {}", fmt9(fit.intercept));
    let _ = writeln!(s, "residual_rms = {}", fmt9(fit.residual_rms));
    let _ = writeln!(s, "points = {}", fit.boundary_points.len());
    let pts: Vec<String> = fit
        .boundary_points
        .iter()
        .map(|&(x, y)| format!("({}, {})", fmt9(x), fmt9(y)))
        .collect();
    let _ = writeln!(s, "boundary = {}", pts.join(" "));
    let excluded: Vec<String> = boundary
        .excluded
        .iter()
        .map(|&(ae, why)| format!("{} ({})", fmt9(ae), why.describe()))
        .collect();
    let _ = writeln!(s, "excluded = {}", or_none(&excluded));
    let anomalies: Vec<String> = boundary
        .anomalies
        .iter()
        .map(|&(ae, ap)| format!("({}, {})", fmt9(ae), fmt9(ap)))
        .collect();
    let _ = writeln!(s, "anomalies = {}", or_none(&anomalies));
    s
}

fn or_none(items: &[String]) -> String {
    if items.is_empty() {
        "none".to_owned()
    } else {
        items.join(", ")
    }
}
