//! Static SVG charts: error overlay of both runs and the chosen cycle.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::experiment::ExperimentLog;
use crate::cancellation::CancellationCycle;
use crate::error::{CeedsError, Result};

pub const OVERLAY_FILE: &str = "error_overlay.svg";
pub const CYCLE_FILE: &str = "cancellation_cycle.svg";
pub const NO_CANDIDATE_FILE: &str = "no_candidate.svg";

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 360.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 40.0;

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn new(x_max: f64, values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = values.fold((0.0f64, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if hi - lo < 1e-9 {
            lo -= 1.0;
            hi += 1.0;
        }
        let pad = 0.05 * (hi - lo);
        Frame {
            x_min: 0.0,
            x_max: x_max.max(1.0),
            y_min: lo - pad,
            y_max: hi + pad,
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT
            + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT
            - MARGIN_BOTTOM
            - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn open_svg(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{title}</text>"#,
        WIDTH / 2.0
    );
    s
}

fn axes(s: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let (x0, x1) = (frame.px(frame.x_min), frame.px(frame.x_max));
    let (y0, y1) = (frame.py(frame.y_min), frame.py(frame.y_max));
    let _ = writeln!(
        s,
        r#"<rect x="{x0:.1}" y="{y1:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    if frame.y_min < 0.0 && frame.y_max > 0.0 {
        let yz = frame.py(0.0);
        let _ = writeln!(
            s,
            r##"<line x1="{x0:.1}" y1="{yz:.1}" x2="{x1:.1}" y2="{yz:.1}" stroke="#bbbbbb" stroke-dasharray="2,3"/>"##
        );
    }
    for k in 0..=4 {
        let y = frame.y_min + (frame.y_max - frame.y_min) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{y:.1}</text>"#,
            x0 - 6.0,
            frame.py(y) + 4.0
        );
        let x = frame.x_min + (frame.x_max - frame.x_min) * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{x:.0}</text>"#,
            frame.px(x),
            y0 + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{x_label}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 6.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{y_label}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
}

fn polyline(s: &mut String, frame: &Frame, values: &[f64], color: &str) {
    let mut points = String::with_capacity(values.len() * 14);
    for (i, v) in values.iter().enumerate() {
        let _ = write!(points, "{:.2},{:.2} ", frame.px(i as f64), frame.py(*v));
    }
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1"/>"#,
        points.trim_end()
    );
}

/// Error of both runs against sample index, with a marker at the cutoff.
pub fn render_error_overlay(
    baseline: &ExperimentLog,
    ceeds: &ExperimentLog,
    cutoff: usize,
) -> String {
    let b = baseline.errors();
    let c = ceeds.errors();
    let n = b.len().max(c.len());
    let frame = Frame::new(n.saturating_sub(1) as f64, b.iter().chain(&c).copied());
    let mut s = open_svg("Error: PIDF baseline vs CEEDS");
    axes(&mut s, &frame, "sample index", "error (RPM)");
    polyline(&mut s, &frame, &b, "#999999");
    polyline(&mut s, &frame, &c, "#1f5fbf");
    let xc = frame.px(cutoff as f64);
    let _ = writeln!(
        s,
        r##"<line x1="{xc:.1}" y1="{:.1}" x2="{xc:.1}" y2="{:.1}" stroke="#c02020" stroke-dasharray="5,4"/>"##,
        frame.py(frame.y_max),
        frame.py(frame.y_min)
    );
    let _ = writeln!(
        s,
        r##"<text x="{:.1}" y="{:.1}" fill="#c02020">cutoff {cutoff}</text>"##,
        xc + 4.0,
        frame.py(frame.y_max) + 14.0
    );
    let lx = WIDTH - MARGIN_RIGHT - 150.0;
    let _ = writeln!(
        s,
        r##"<line x1="{lx:.1}" y1="48" x2="{:.1}" y2="48" stroke="#999999"/><text x="{:.1}" y="52">baseline (km=0)</text>"##,
        lx + 20.0,
        lx + 26.0
    );
    let _ = writeln!(
        s,
        r##"<line x1="{lx:.1}" y1="64" x2="{:.1}" y2="64" stroke="#1f5fbf"/><text x="{:.1}" y="68">CEEDS</text>"##,
        lx + 20.0,
        lx + 26.0
    );
    s.push_str("</svg>\n");
    s
}

/// One period of the cancellation cycle, zero padding included.
pub fn render_cycle(cycle: &CancellationCycle) -> String {
    let v = &cycle.cycle_values;
    let frame = Frame::new(v.len().saturating_sub(1) as f64, v.iter().copied());
    let mut s = open_svg(&format!(
        "Cancellation cycle: period {}, motif length {}, offset {}",
        cycle.modal_period(),
        cycle.motif_length,
        cycle.offset
    ));
    axes(&mut s, &frame, "cycle position", "cancellation (RPM)");
    let y0 = frame.py(0.0f64.clamp(frame.y_min, frame.y_max));
    for (i, val) in v.iter().enumerate() {
        let x = frame.px(i as f64);
        let color = if i < cycle.motif_length {
            "#1f5fbf"
        } else {
            "#aaaaaa"
        };
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}"/><circle cx="{x:.2}" cy="{:.2}" r="2" fill="{color}"/>"#,
            frame.py(*val),
            frame.py(*val)
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn render_placeholder() -> String {
    let mut s = open_svg("No cancellation candidate");
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">analysis produced no usable motif; the controller ran PIDF only</text>"#,
        WIDTH / 2.0,
        HEIGHT / 2.0
    );
    s.push_str("</svg>\n");
    s
}

fn write(path: PathBuf, body: &str) -> Result<PathBuf> {
    fs::write(&path, body).map_err(|e| CeedsError::io(&path, e))?;
    Ok(path)
}

/// Writes the overlay and the cycle chart (or a placeholder) into `output_dir`.
pub fn render_plots(
    baseline: &ExperimentLog,
    ceeds: &ExperimentLog,
    chosen: Option<&CancellationCycle>,
    cutoff: usize,
    output_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let overlay = write(
        output_dir.join(OVERLAY_FILE),
        &render_error_overlay(baseline, ceeds, cutoff),
    )?;
    let second = match chosen {
        Some(c) => write(output_dir.join(CYCLE_FILE), &render_cycle(c))?,
        None => write(output_dir.join(NO_CANDIDATE_FILE), &render_placeholder())?,
    };
    Ok(vec![overlay, second])
}
