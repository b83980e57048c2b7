//! Minimal standalone SVG 1.1 line and grouped bar charts.
//!
//! Every plotted value is also written into a `data-value` attribute so the
//! figure can be checked against the numbers it was drawn from.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Horizontal reference lines `(label, y)`.
    pub references: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarGroup {
    pub label: String,
    /// `(series name, value)`; series names should repeat across groups.
    pub bars: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub groups: Vec<BarGroup>,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn padded_range(values: impl Iterator<Item = f64>, include_zero: bool) -> (f64, f64) {
    let (mut lo, mut hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if include_zero {
        lo = lo.min(0.0);
        hi = hi.max(0.0);
    }
    if hi - lo < 1e-9 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (if include_zero && lo == 0.0 { 0.0 } else { lo - pad }, hi + pad)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="28" text-anchor="middle" font-size="15">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str, x_ticks: bool) {
    let (l, r) = (LEFT, WIDTH - RIGHT);
    let (t, b) = (TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        out,
        r#"<path d="M{l},{t} L{l},{b} L{r},{b}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let y = frame.y0 + (frame.y1 - frame.y0) * i as f64 / 5.0;
        let py = frame.py(y);
        let _ = writeln!(
            out,
            r##"<line x1="{l}" y1="{py:.2}" x2="{r}" y2="{py:.2}" stroke="#dddddd"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            l - 6.0,
            py + 4.0,
            tick_label(y)
        );
    }
    if x_ticks {
        for i in 0..=5 {
            let x = frame.x0 + (frame.x1 - frame.x0) * i as f64 / 5.0;
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
                frame.px(x),
                b + 18.0,
                tick_label(x)
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (l + r) / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
        (t + b) / 2.0,
        escape(y_label)
    );
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

fn legend(out: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * i as f64;
        let x = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            out,
            r#"<rect x="{x}" y="{}" width="12" height="12" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            y - 10.0,
            PALETTE[i % PALETTE.len()],
            x + 18.0,
            y,
            escape(name)
        );
    }
}

pub fn render_line_chart(chart: &LineChart) -> String {
    let xs = chart.series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let (x0, x1) = padded_range(xs, false);
    let ys = chart
        .series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .chain(chart.references.iter().map(|r| r.1));
    let (y0, y1) = padded_range(ys, true);
    let frame = Frame { x0, x1, y0, y1 };

    let mut out = String::new();
    header(&mut out, &chart.title);
    axes(&mut out, &frame, &chart.x_label, &chart.y_label, true);
    for (label, y) in &chart.references {
        let py = frame.py(*y);
        let _ = writeln!(
            out,
            r#"<line class="reference" x1="{LEFT}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="black" stroke-dasharray="6,4" data-value="{y}"/><text x="{}" y="{:.2}">{}</text>"#,
            WIDTH - RIGHT,
            WIDTH - RIGHT + 4.0,
            py + 4.0,
            escape(label)
        );
    }
    for (i, series) in chart.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = series
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="series" data-name="{}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            escape(&series.name),
            path.join(" ")
        );
        for &(x, y) in &series.points {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="1.8" fill="{color}" data-x="{x}" data-value="{y}"/>"#,
                frame.px(x),
                frame.py(y)
            );
        }
    }
    let names: Vec<&str> = chart.series.iter().map(|s| s.name.as_str()).collect();
    legend(&mut out, &names);
    out.push_str("</svg>\n");
    out
}

pub fn render_bar_chart(chart: &BarChart) -> String {
    let mut names: Vec<&str> = Vec::new();
    for g in &chart.groups {
        for (name, _) in &g.bars {
            if !names.contains(&name.as_str()) {
                names.push(name);
            }
        }
    }
    let values = chart.groups.iter().flat_map(|g| g.bars.iter().map(|b| b.1));
    let (y0, y1) = padded_range(values, true);
    let frame = Frame {
        x0: 0.0,
        x1: chart.groups.len().max(1) as f64,
        y0,
        y1,
    };

    let mut out = String::new();
    header(&mut out, &chart.title);
    axes(&mut out, &frame, &chart.x_label, &chart.y_label, false);
    let slot = frame.px(1.0) - frame.px(0.0);
    let bar_width = 0.8 * slot / names.len().max(1) as f64;
    for (gi, group) in chart.groups.iter().enumerate() {
        let gx = frame.px(gi as f64) + 0.1 * slot;
        let _ = writeln!(
            out,
            r#"<g class="group" data-label="{}">"#,
            escape(&group.label)
        );
        for (name, value) in &group.bars {
            let si = names.iter().position(|n| n == name).unwrap_or(0);
            let x = gx + bar_width * si as f64;
            let (top, bottom) = (frame.py(value.max(0.0)), frame.py(value.min(0.0)));
            let _ = writeln!(
                out,
                r#"<rect class="bar" x="{x:.2}" y="{top:.2}" width="{bar_width:.2}" height="{:.2}" fill="{}" data-series="{}" data-value="{value}"><title>{}: {value}</title></rect>"#,
                bottom - top,
                PALETTE[si % PALETTE.len()],
                escape(name),
                escape(name)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text></g>"#,
            frame.px(gi as f64 + 0.5),
            HEIGHT - BOTTOM + 18.0,
            escape(&group.label)
        );
    }
    legend(&mut out, &names);
    out.push_str("</svg>\n");
    out
}
