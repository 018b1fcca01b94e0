//! SVG density scatter of an STDP window with fitted curves overlaid.

use std::fmt::Write as _;

use crate::experiment::StdpWindowResult;
use crate::fitting::{FitModel, FitResult, Side};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
/// Samples drawn per grid point in figure mode.
const MARKERS_PER_POINT: usize = 150;
/// Level bin width used to estimate local density of noisy samples.
const DENSITY_BIN: f64 = 0.25;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        LEFT + (v - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - (v - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn axes(svg: &mut String, f: &Frame, devices: usize) {
    let (xa, xb) = (f.x(f.x0), f.x(f.x1));
    let (ya, yb) = (f.y(f.y0), f.y(f.y1));
    let _ = writeln!(
        svg,
        r#"<g class="axes" stroke="black" stroke-width="1" fill="none">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{xa:.2}" y="{yb:.2}" width="{:.2}" height="{:.2}"/>"#,
        xb - xa,
        ya - yb
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{xa:.2}" y1="{0:.2}" x2="{xb:.2}" y2="{0:.2}" stroke-dasharray="2,3" stroke="gray"/>"#,
        f.y(0.0)
    );
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(
        svg,
        r#"<g class="ticks" font-family="sans-serif" font-size="11" fill="black">"#
    );
    let first = f.x0.ceil() as i64;
    let last = f.x1.floor() as i64;
    for t in first..=last {
        let x = f.x(t as f64);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{ya:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            ya + 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{t}</text>"#,
            ya + 18.0
        );
    }
    let step = (devices as i64 / 4).max(1);
    let n = devices as i64;
    let mut level = -n - (-n).rem_euclid(step);
    while level <= n {
        if level >= -n {
            let y = f.y(level as f64);
            let _ = writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{xa:.2}" y2="{y:.2}" stroke="black"/>"#,
                xa - 5.0
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{level}</text>"#,
                xa - 8.0,
                y + 4.0
            );
        }
        level += step;
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">Δt (time units)</text>"#,
        (xa + xb) / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" font-family="sans-serif" font-size="13" text-anchor="middle">Δg (normalized conductance change)</text>"#,
        (ya + yb) / 2.0
    );
}

fn fit_curve(svg: &mut String, f: &Frame, fit: &FitResult) {
    if fit.is_skipped() || !fit.a.is_finite() || !fit.b.is_finite() {
        return;
    }
    let [lo, hi] = fit.domain;
    let sign = match fit.side {
        Side::Set => 1.0,
        Side::Reset => -1.0,
    };
    let (color, dash) = match fit.model {
        FitModel::Exponential => ("#c0392b", ""),
        FitModel::Linear => ("#1f5fa8", r#" stroke-dasharray="6,4""#),
    };
    let mut pts = String::new();
    for i in 0..=100 {
        let x = lo + (hi - lo) * i as f64 / 100.0;
        let y = (sign * fit.predict(x)).clamp(f.y0, f.y1);
        let _ = write!(pts, "{:.2},{:.2} ", f.x(x), f.y(y));
    }
    let model = match fit.model {
        FitModel::Exponential => "exponential",
        FitModel::Linear => "linear",
    };
    let _ = writeln!(
        svg,
        r#"<polyline class="fit {model}" fill="none" stroke="{color}" stroke-width="2"{dash} points="{}"/>"#,
        pts.trim_end()
    );
}

/// Renders the window. With figure-mode samples every marker is one noisy
/// sample whose opacity follows the local sample density; otherwise one
/// marker per occupied level with opacity following its frequency.
pub fn render_svg(window: &StdpWindowResult, fits: &[&FitResult]) -> String {
    let n = window.devices;
    let (x0, x1) = match (window.points.first(), window.points.last()) {
        (Some(a), Some(b)) if b.delta_t > a.delta_t => (a.delta_t.floor(), b.delta_t.ceil()),
        (Some(a), _) => (a.delta_t.floor() - 1.0, a.delta_t.ceil() + 1.0),
        _ => (-5.0, 5.0),
    };
    let frame = Frame {
        x0,
        x1,
        y0: -(n as f64) - 1.0,
        y1: n as f64 + 1.0,
    };

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    axes(&mut svg, &frame, n);

    let _ = writeln!(svg, r#"<g class="markers" fill="black" stroke="none">"#);
    let bins = 2 * ((n as f64 + 2.0) / DENSITY_BIN).ceil() as usize + 1;
    let bin_of = |v: f64| -> usize {
        let b = (v / DENSITY_BIN).round() + (bins / 2) as f64;
        b.clamp(0.0, (bins - 1) as f64) as usize
    };
    for p in &window.points {
        if p.samples.is_empty() {
            continue;
        }
        let total = p.samples.len() as f64;
        let x = frame.x(p.delta_t);
        if window.figure_mode {
            let mut density = vec![0u32; bins];
            for s in &p.samples {
                density[bin_of(s.delta_g_noisy)] += 1;
            }
            let peak = f64::from(*density.iter().max().unwrap_or(&1));
            let stride = p.samples.len().div_ceil(MARKERS_PER_POINT).max(1);
            for s in p.samples.iter().step_by(stride) {
                let opacity = (f64::from(density[bin_of(s.delta_g_noisy)]) / peak).max(0.03);
                let y = frame.y(s.delta_g_noisy.clamp(frame.y0, frame.y1));
                let _ = writeln!(
                    svg,
                    r#"<circle class="marker" cx="{x:.2}" cy="{y:.2}" r="1.6" fill-opacity="{opacity:.3}"/>"#
                );
            }
        } else {
            for (idx, &count) in p.histogram.iter().enumerate() {
                if count == 0 {
                    continue;
                }
                let level = idx as i32 - n as i32;
                let opacity = (count as f64 / total).max(0.03);
                let r = if level == p.mode { 3.0 } else { 2.0 };
                let y = frame.y(f64::from(level));
                let _ = writeln!(
                    svg,
                    r#"<circle class="marker" cx="{x:.2}" cy="{y:.2}" r="{r}" fill-opacity="{opacity:.3}"/>"#
                );
            }
        }
    }
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r#"<g class="fits">"#);
    for fit in fits {
        fit_curve(&mut svg, &frame, fit);
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, "</svg>");
    svg
}
