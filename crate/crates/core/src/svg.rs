//! Minimal SVG renderings of trajectories and zone maps.

use std::fmt::Write as _;

use crate::episode::{EpisodeResult, Outcome};
use crate::zones::{LineFit, ZoneGrid};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 640.0;
const MARGIN: f64 = 48.0;

const PURSUER: &str = "#d62728";
const EVADER: &str = "#1f77b4";
const CAPTURE_FILL: &str = "#4daf4a";
const ESCAPE_FILL: &str = "#e7298a";

/// Affine map from a data rectangle onto the plot area, y pointing up.
struct Frame {
    x0: f64,
    y0: f64,
    scale_x: f64,
    scale_y: f64,
}

impl Frame {
    fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, equal_aspect: bool) -> Self {
        let span_x = (x_max - x_min).max(1e-9);
        let span_y = (y_max - y_min).max(1e-9);
        let mut scale_x = (WIDTH - 2.0 * MARGIN) / span_x;
        let mut scale_y = (HEIGHT - 2.0 * MARGIN) / span_y;
        if equal_aspect {
            let s = scale_x.min(scale_y);
            scale_x = s;
            scale_y = s;
        }
        Frame {
            x0: x_min,
            y0: y_min,
            scale_x,
            scale_y,
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) * self.scale_x
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) * self.scale_y
    }
}

fn header(s: &mut String, title: &str) {
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn polyline(s: &mut String, frame: &Frame, pts: impl Iterator<Item = (f64, f64)>, color: &str) {
    let coords: Vec<String> = pts
        .map(|(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect();
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
        coords.join(" ")
    );
}

/// Both agents' paths with start markers and, if captured, the capture point.
pub fn trajectory_svg(result: &EpisodeResult, title: &str) -> String {
    let rows = &result.trajectory;
    let (mut x_min, mut x_max, mut y_min, mut y_max) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for r in rows {
        for p in [r.x_p, r.x_e] {
            x_min = x_min.min(p.x);
            x_max = x_max.max(p.x);
            y_min = y_min.min(p.y);
            y_max = y_max.max(p.y);
        }
    }
    let pad = 0.05 * (x_max - x_min).max(y_max - y_min).max(1.0);
    let frame = Frame::new(x_min - pad, x_max + pad, y_min - pad, y_max + pad, true);

    let mut s = String::new();
    header(&mut s, title);
    polyline(&mut s, &frame, rows.iter().map(|r| (r.x_p.x, r.x_p.y)), PURSUER);
    polyline(&mut s, &frame, rows.iter().map(|r| (r.x_e.x, r.x_e.y)), EVADER);

    let first = &rows[0];
    for (p, color) in [(first.x_p, PURSUER), (first.x_e, EVADER)] {
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="8" height="8" fill="{color}"/>"#,
            frame.px(p.x) - 4.0,
            frame.py(p.y) - 4.0
        );
    }
    if result.outcome == Outcome::Captured {
        let last = result.final_row();
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="6" fill="none" stroke="black" stroke-width="2"/>"#,
            frame.px(last.x_e.x),
            frame.py(last.x_e.y)
        );
    }
    let label = match result.capture_time {
        Some(t) => format!("captured at t = {t:.2} s"),
        None => format!("escaped (t = {:.2} s)", result.final_row().t),
    };
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{}" font-family="sans-serif" font-size="12"><tspan fill="{PURSUER}">pursuer</tspan> / <tspan fill="{EVADER}">evader</tspan>: {label}</text>"#,
        HEIGHT - 12.0
    );
    s.push_str("</svg>\n");
    s
}

/// Two-colour zone map with the `a_p = a_e` diagonal and, when given, the fitted line.
pub fn zone_svg(grid: &ZoneGrid, fit: Option<&LineFit>, title: &str) -> String {
    let step = |axis: &[f64]| {
        if axis.len() > 1 {
            axis[1] - axis[0]
        } else {
            1.0
        }
    };
    let (dx, dy) = (step(&grid.ae), step(&grid.ap));
    let (Some(&ae_lo), Some(&ae_hi), Some(&ap_lo), Some(&ap_hi)) =
        (grid.ae.first(), grid.ae.last(), grid.ap.first(), grid.ap.last())
    else {
        let mut s = String::new();
        header(&mut s, title);
        s.push_str("</svg>\n");
        return s;
    };
    let (x_lo, x_hi) = (ae_lo - dx / 2.0, ae_hi + dx / 2.0);
    let (y_lo, y_hi) = (ap_lo - dy / 2.0, ap_hi + dy / 2.0);
    let frame = Frame::new(x_lo, x_hi, y_lo, y_hi, false);

    let mut s = String::new();
    header(&mut s, title);
    for (ae, ap, outcome, _) in grid.cells() {
        let fill = match outcome {
            Outcome::Captured => CAPTURE_FILL,
            Outcome::Escaped => ESCAPE_FILL,
        };
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
            frame.px(ae - dx / 2.0),
            frame.py(ap + dy / 2.0),
            dx * frame.scale_x,
            dy * frame.scale_y
        );
    }

    let _ = writeln!(
        s,
        r#"<clipPath id="plot"><rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}"/></clipPath>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let mut line = |f: &dyn Fn(f64) -> f64, style: &str| {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" clip-path="url(#plot)" {style}/>"#,
            frame.px(x_lo),
            frame.py(f(x_lo)),
            frame.px(x_hi),
            frame.py(f(x_hi))
        );
    };
    line(&|x| x, r#"stroke="black" stroke-width="1.5" stroke-dasharray="6 4""#);
    if let Some(fit) = fit {
        line(&|x| fit.predict(x), r#"stroke="black" stroke-width="2""#);
    }
    let caption = match fit {
        Some(f) => format!("a_p = {:.3} a_e + {:.3} (solid), a_p = a_e (dashed)", f.slope, f.intercept),
        None => "a_p = a_e (dashed)".to_owned(),
    };
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{}" font-family="sans-serif" font-size="12">x: a_e, y: a_p. {}</text>"#,
        HEIGHT - 12.0,
        escape(&caption)
    );
    s.push_str("</svg>\n");
    s
}
