//! Hand-written SVG plots on a fixed 960x540 canvas.

use std::fmt::Write as _;

use super::ReportError;
use crate::event_study::{Side, WindowScanResult};
use crate::measures::Histogram;

pub const CANVAS_WIDTH: f64 = 960.0;
pub const CANVAS_HEIGHT: f64 = 540.0;

const LEFT: f64 = 80.0;
const RIGHT: f64 = 40.0;
const TOP: f64 = 60.0;
const BOTTOM: f64 = 70.0;
const PLOT_W: f64 = CANVAS_WIDTH - LEFT - RIGHT;
const PLOT_H: f64 = CANVAS_HEIGHT - TOP - BOTTOM;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotStyle {
    pub before_color: String,
    pub after_color: String,
    /// Written into a leading XML comment, typically the configuration echo.
    pub metadata: Option<String>,
}

impl Default for PlotStyle {
    fn default() -> Self {
        Self {
            before_color: "#1f77b4".into(),
            after_color: "#ff7f0e".into(),
            metadata: None,
        }
    }
}

impl PlotStyle {
    fn color(&self, side: Side) -> &str {
        match side {
            Side::Before => &self.before_color,
            Side::After => &self.after_color,
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn open_svg(out: &mut String, style: &PlotStyle, title: &str, extra_attrs: &str) {
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    if let Some(meta) = &style.metadata {
        // "--" may not appear inside an XML comment
        let mut safe = meta.replace("--", "- -");
        if safe.ends_with('-') {
            safe.push(' ');
        }
        let _ = writeln!(out, "<!--\n{safe}\n-->");
    }
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{CANVAS_WIDTH}\" height=\"{CANVAS_HEIGHT}\" \
         viewBox=\"0 0 {CANVAS_WIDTH} {CANVAS_HEIGHT}\" font-family=\"sans-serif\"{extra_attrs}>"
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = writeln!(
        out,
        "<rect width=\"{CANVAS_WIDTH}\" height=\"{CANVAS_HEIGHT}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"32\" font-size=\"18\" text-anchor=\"middle\">{}</text>",
        CANVAS_WIDTH / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, x_label: &str, y_label: &str, x_ticks: &[(f64, String)], y_ticks: &[(f64, String)]) {
    let x0 = LEFT;
    let y0 = TOP + PLOT_H;
    let _ = writeln!(
        out,
        "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\
         <line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{:.2}\" y2=\"{y0:.2}\"/>\
         <line x1=\"{x0:.2}\" y1=\"{TOP:.2}\" x2=\"{x0:.2}\" y2=\"{y0:.2}\"/></g>",
        LEFT + PLOT_W
    );
    out.push_str("<g class=\"ticks\" font-size=\"12\">\n");
    for (x, label) in x_ticks {
        let _ = writeln!(
            out,
            "<line x1=\"{x:.2}\" y1=\"{y0:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\
             <text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
            y0 + 5.0,
            y0 + 20.0,
            escape(label)
        );
    }
    for (y, label) in y_ticks {
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{x0:.2}\" y2=\"{y:.2}\" stroke=\"black\"/>\
             <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0,
            escape(label)
        );
    }
    out.push_str("</g>\n");
    let _ = writeln!(
        out,
        "<text class=\"x-label\" x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
        LEFT + PLOT_W / 2.0,
        CANVAS_HEIGHT - 20.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        "<text class=\"y-label\" x=\"20\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\" \
         transform=\"rotate(-90 20 {:.2})\">{}</text>",
        TOP + PLOT_H / 2.0,
        TOP + PLOT_H / 2.0,
        escape(y_label)
    );
}

fn legend(out: &mut String, entries: &[(Side, &str, bool)]) {
    out.push_str("<g class=\"legend\" font-size=\"13\">\n");
    for (i, (side, color, dashed)) in entries.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * i as f64;
        let x = LEFT + PLOT_W - 110.0;
        let dash = if *dashed { " stroke-dasharray=\"6 4\"" } else { "" };
        let _ = writeln!(
            out,
            "<line x1=\"{x:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{color}\" stroke-width=\"3\"{dash}/>\
             <text x=\"{:.2}\" y=\"{:.2}\">{side}</text>",
            x + 30.0,
            x + 38.0,
            y + 4.0
        );
    }
    out.push_str("</g>\n");
}

fn linear_ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..=count).map(|i| lo + (hi - lo) * i as f64 / count as f64).collect()
}

/// Bar chart of bin probabilities, optionally with a second histogram drawn
/// over it (before in the first color, after in the second). Every bin gets
/// a `<rect class="bar">`, empty bins included.
pub fn render_histogram_svg(h: &Histogram, overlay: Option<&Histogram>, title: &str, style: &PlotStyle) -> String {
    let layers: Vec<(Side, &Histogram)> = std::iter::once((Side::Before, h))
        .chain(overlay.map(|o| (Side::After, o)))
        .collect();

    let mut x_lo = layers.iter().map(|(_, h)| h.edges()[0]).fold(f64::INFINITY, f64::min);
    let mut x_hi = layers
        .iter()
        .map(|(_, h)| h.edges()[h.bins()])
        .fold(f64::NEG_INFINITY, f64::max);
    if x_hi <= x_lo {
        let pad = if x_lo == 0.0 { 1.0 } else { x_lo.abs() * 0.1 };
        x_lo -= pad;
        x_hi += pad;
    }
    let p_max = layers
        .iter()
        .flat_map(|(_, h)| h.probabilities().iter().copied())
        .fold(0.0f64, f64::max);
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * PLOT_W;
    let sy = |p: f64| TOP + PLOT_H - p / p_max * PLOT_H;

    let mut out = String::new();
    open_svg(&mut out, style, title, "");
    let opacity = if overlay.is_some() { 0.6 } else { 0.85 };
    for (side, hist) in &layers {
        let _ = writeln!(
            out,
            "<g class=\"bars\" data-side=\"{side}\" fill=\"{}\" fill-opacity=\"{opacity}\">",
            style.color(*side)
        );
        for i in 0..hist.bins() {
            let (lo, hi) = (hist.edges()[i], hist.edges()[i + 1]);
            let (x, w) = if hist.is_degenerate() {
                // zero-width bin: draw a sliver centred on the value
                let w = PLOT_W / 40.0;
                (sx(lo) - w / 2.0, w)
            } else {
                (sx(lo), sx(hi) - sx(lo))
            };
            let p = hist.probabilities()[i];
            let y = sy(p);
            let _ = writeln!(
                out,
                "<rect class=\"bar\" x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{:.2}\" \
                 stroke=\"white\" stroke-width=\"0.5\" data-probability=\"{p}\" data-count=\"{}\"/>",
                TOP + PLOT_H - y,
                hist.counts()[i]
            );
        }
        out.push_str("</g>\n");
    }
    let x_ticks: Vec<(f64, String)> = linear_ticks(x_lo, x_hi, 6)
        .into_iter()
        .map(|v| (sx(v), format!("{v:.3}")))
        .collect();
    let y_ticks: Vec<(f64, String)> = linear_ticks(0.0, p_max, 5)
        .into_iter()
        .map(|v| (sy(v), format!("{v:.3}")))
        .collect();
    axes(&mut out, "log-return", "probability", &x_ticks, &y_ticks);
    if overlay.is_some() {
        legend(
            &mut out,
            &[
                (Side::Before, &style.before_color, false),
                (Side::After, &style.after_color, false),
            ],
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Y-range of a scan plot: entropy min..max padded by 5% of the spread on
/// each side (5% of the value, or 0.05, when all entropies coincide).
pub fn scan_y_range(scans: &[WindowScanResult]) -> Option<(f64, f64)> {
    let values = scans.iter().flat_map(|s| s.points.iter().map(|p| p.entropy.value));
    let (lo, hi) = values.fold(None, |acc: Option<(f64, f64)>, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })?;
    let pad = if hi > lo {
        0.05 * (hi - lo)
    } else if lo != 0.0 {
        0.05 * lo.abs()
    } else {
        0.05
    };
    Some((lo - pad, hi + pad))
}

/// Entropy against window length, one polyline per scan. A scan with a
/// single point is drawn as a marker only.
pub fn render_scan_plot(scans: &[WindowScanResult], title: &str, style: &PlotStyle) -> Result<String, ReportError> {
    let (y_lo, y_hi) = scan_y_range(scans).ok_or(ReportError::EmptyScan)?;
    let lengths = scans
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.window_length as f64));
    let (mut x_lo, mut x_hi) = lengths.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if x_hi <= x_lo {
        x_lo -= 1.0;
        x_hi += 1.0;
    }
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * PLOT_W;
    let sy = |y: f64| TOP + PLOT_H - (y - y_lo) / (y_hi - y_lo) * PLOT_H;

    let unit = scans
        .iter()
        .find_map(|s| s.points.first())
        .map_or("nats", |p| p.entropy.unit());
    let mut out = String::new();
    open_svg(
        &mut out,
        style,
        title,
        &format!(" data-y-min=\"{y_lo}\" data-y-max=\"{y_hi}\""),
    );
    let mut entries = Vec::new();
    for scan in scans.iter().filter(|s| !s.points.is_empty()) {
        let color = style.color(scan.side);
        let dashed = scan.side == Side::After;
        let pts: Vec<String> = scan
            .points
            .iter()
            .map(|p| format!("{:.2},{:.2}", sx(p.window_length as f64), sy(p.entropy.value)))
            .collect();
        let _ = writeln!(
            out,
            "<g class=\"scan\" data-side=\"{}\" data-symbol=\"{}\">",
            scan.side,
            escape(&scan.symbol)
        );
        if pts.len() > 1 {
            let dash = if dashed { " stroke-dasharray=\"6 4\"" } else { "" };
            let _ = writeln!(
                out,
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"{dash} points=\"{}\"/>",
                pts.join(" ")
            );
        }
        for (p, xy) in scan.points.iter().zip(&pts) {
            let (x, y) = xy.split_once(',').expect("formatted as x,y");
            let _ = writeln!(
                out,
                "<circle class=\"marker\" cx=\"{x}\" cy=\"{y}\" r=\"4\" fill=\"{color}\" data-length=\"{}\" data-entropy=\"{}\"/>",
                p.window_length, p.entropy.value
            );
        }
        out.push_str("</g>\n");
        entries.push((scan.side, color, dashed));
    }
    let x_ticks: Vec<(f64, String)> = linear_ticks(x_lo, x_hi, 6)
        .into_iter()
        .map(|v| (sx(v), format!("{v:.0}")))
        .collect();
    let y_ticks: Vec<(f64, String)> = linear_ticks(y_lo, y_hi, 5)
        .into_iter()
        .map(|v| (sy(v), format!("{v:.3}")))
        .collect();
    axes(
        &mut out,
        "window length (trading days)",
        &format!("entropy ({unit})"),
        &x_ticks,
        &y_ticks,
    );
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    Ok(out)
}
