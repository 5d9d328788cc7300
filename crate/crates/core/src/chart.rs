//! Deterministic, self-contained SVG charts: spaghetti lines, histograms,
//! box plots, ranked confidence-interval dot plots, and scatter plots.
//!
//! Rendering is a pure function of the input: no clocks, no locales, no
//! external resources. Identical inputs produce byte-identical SVG. The
//! output uses a small SVG 1.1 subset (rect, line, polyline, circle,
//! text). Axis ranges are padded 5% beyond the data extent; colors come
//! from a fixed palette keyed by each series' color key in order of
//! first appearance.

use crate::stats::{tukey_box, Histogram, StatsError};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChartError {
    #[error("no data to draw")]
    EmptyData,
    #[error("chart kind {expected} does not accept {got} data")]
    KindMismatch {
        expected: &'static str,
        got: &'static str,
    },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    Spaghetti,
    Histogram,
    Box,
    CiDot,
    Scatter,
}

impl ChartKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChartKind::Spaghetti => "spaghetti",
            ChartKind::Histogram => "histogram",
            ChartKind::Box => "box",
            ChartKind::CiDot => "ci_dot",
            ChartKind::Scatter => "scatter",
        }
    }
}

/// One line of a spaghetti chart.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesLine {
    pub label: String,
    /// Series with the same key share a color (e.g. a broad section).
    pub color_key: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

/// One group of a box chart.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxGroup {
    pub label: String,
    pub values: Vec<f64>,
}

/// One row of a confidence-interval dot plot, already in display order.
#[derive(Debug, Clone, PartialEq)]
pub struct CiPoint {
    pub label: String,
    pub color_key: String,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChartData {
    Spaghetti(Vec<SeriesLine>),
    Histogram(Histogram),
    Box(Vec<BoxGroup>),
    CiDot(Vec<CiPoint>),
    Scatter(Vec<(f64, f64)>),
}

impl ChartData {
    fn kind(&self) -> ChartKind {
        match self {
            ChartData::Spaghetti(_) => ChartKind::Spaghetti,
            ChartData::Histogram(_) => ChartKind::Histogram,
            ChartData::Box(_) => ChartKind::Box,
            ChartData::CiDot(_) => ChartKind::CiDot,
            ChartData::Scatter(_) => ChartKind::Scatter,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartOptions {
    pub width: u32,
    pub height: u32,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
}

impl Default for ChartOptions {
    fn default() -> Self {
        ChartOptions {
            width: 900,
            height: 540,
            title: String::new(),
            x_label: String::new(),
            y_label: String::new(),
        }
    }
}

/// A finished chart: kind, pixel size, and the SVG text.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartDocument {
    pub kind: ChartKind,
    pub width: u32,
    pub height: u32,
    pub svg: String,
}

const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];

fn color_for<'a>(keys: &mut Vec<&'a str>, key: &'a str) -> &'static str {
    let idx = match keys.iter().position(|k| *k == key) {
        Some(i) => i,
        None => {
            keys.push(key);
            keys.len() - 1
        }
    };
    PALETTE[idx % PALETTE.len()]
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Renders a chart; `kind` must match the data variant.
pub fn render_chart(
    kind: ChartKind,
    data: &ChartData,
    opts: &ChartOptions,
) -> Result<ChartDocument, ChartError> {
    if kind != data.kind() {
        return Err(ChartError::KindMismatch {
            expected: kind.as_str(),
            got: data.kind().as_str(),
        });
    }
    let svg = match data {
        ChartData::Spaghetti(series) => spaghetti_svg(series, opts)?,
        ChartData::Histogram(hist) => histogram_svg(hist, opts)?,
        ChartData::Box(groups) => box_svg(groups, opts)?,
        ChartData::CiDot(points) => ci_dot_svg(points, opts)?,
        ChartData::Scatter(points) => scatter_svg(points, opts)?,
    };
    Ok(ChartDocument {
        kind,
        width: opts.width,
        height: opts.height,
        svg,
    })
}

/// Linear data-to-pixel scale.
struct Scale {
    d_min: f64,
    d_span: f64,
    p_min: f64,
    p_span: f64,
}

impl Scale {
    /// Pads the data extent by 5% on both sides.
    fn padded(min: f64, max: f64, p_min: f64, p_max: f64) -> Scale {
        let pad = if max > min { 0.05 * (max - min) } else { 1.0 };
        let d_min = min - pad;
        let d_span = (max + pad) - d_min;
        Scale {
            d_min,
            d_span,
            p_min,
            p_span: p_max - p_min,
        }
    }

    fn px(&self, v: f64) -> f64 {
        self.p_min + (v - self.d_min) / self.d_span * self.p_span
    }

    fn d_max(&self) -> f64 {
        self.d_min + self.d_span
    }
}

/// Tick positions as integer multiples of a 1/2/5 step.
fn ticks(min: f64, max: f64) -> Vec<f64> {
    let range = max - min;
    if range <= 0.0 {
        return vec![min];
    }
    let raw = range / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let mut out = Vec::new();
    let mut k = (min / step).ceil() as i64;
    while (k as f64) * step <= max + 1e-9 * step {
        out.push(k as f64 * step);
        k += 1;
    }
    out
}

fn fmt_tick(v: f64, step_hint: f64) -> String {
    if step_hint >= 1.0 || v == 0.0 {
        format!("{v:.0}")
    } else {
        let decimals = (-step_hint.log10()).ceil().clamp(1.0, 6.0) as usize;
        format!("{v:.*}", decimals)
    }
}

struct Frame {
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
    height: f64,
}

impl Frame {
    fn new(opts: &ChartOptions, left: f64) -> Frame {
        Frame {
            left,
            right: opts.width as f64 - 25.0,
            top: 45.0,
            bottom: opts.height as f64 - 55.0,
            height: opts.height as f64,
        }
    }
}

fn svg_open(out: &mut String, opts: &ChartOptions) {
    let _ = write!(
        out,
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
        w = opts.width,
        h = opts.height
    );
    let _ = writeln!(
        out,
        "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>",
        opts.width, opts.height
    );
    if !opts.title.is_empty() {
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>",
            opts.width as f64 / 2.0,
            escape_xml(&opts.title)
        );
    }
}

fn axis_labels(out: &mut String, opts: &ChartOptions, frame: &Frame) {
    if !opts.x_label.is_empty() {
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>",
            (frame.left + frame.right) / 2.0,
            frame.height - 12.0,
            escape_xml(&opts.x_label)
        );
    }
    if !opts.y_label.is_empty() {
        let _ = writeln!(
            out,
            "<text x=\"16\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{}</text>",
            (frame.top + frame.bottom) / 2.0,
            (frame.top + frame.bottom) / 2.0,
            escape_xml(&opts.y_label)
        );
    }
}

fn x_axis(out: &mut String, frame: &Frame, scale: &Scale) {
    let _ = writeln!(
        out,
        "<line x1=\"{:.2}\" y1=\"{b:.2}\" x2=\"{:.2}\" y2=\"{b:.2}\" stroke=\"#333333\" stroke-width=\"1\"/>",
        frame.left,
        frame.right,
        b = frame.bottom
    );
    let tick_values = ticks(scale.d_min, scale.d_max());
    let step = if tick_values.len() >= 2 {
        tick_values[1] - tick_values[0]
    } else {
        1.0
    };
    for t in tick_values {
        let x = scale.px(t);
        let _ = writeln!(
            out,
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#333333\" stroke-width=\"1\"/>",
            frame.bottom,
            frame.bottom + 5.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
            frame.bottom + 18.0,
            fmt_tick(t, step)
        );
    }
}

fn y_axis(out: &mut String, frame: &Frame, scale: &Scale, grid: bool) {
    let _ = writeln!(
        out,
        "<line x1=\"{l:.2}\" y1=\"{:.2}\" x2=\"{l:.2}\" y2=\"{:.2}\" stroke=\"#333333\" stroke-width=\"1\"/>",
        frame.top,
        frame.bottom,
        l = frame.left
    );
    let tick_values = ticks(scale.d_min, scale.d_max());
    let step = if tick_values.len() >= 2 {
        tick_values[1] - tick_values[0]
    } else {
        1.0
    };
    for t in tick_values {
        let y = scale.px(t);
        if grid {
            let _ = writeln!(
                out,
                "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#dddddd\" stroke-width=\"1\"/>",
                frame.left,
                frame.right
            );
        }
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#333333\" stroke-width=\"1\"/>",
            frame.left - 5.0,
            frame.left
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>",
            frame.left - 8.0,
            y + 4.0,
            fmt_tick(t, step)
        );
    }
}

/// Vertical pixel scale: data grows upward, pixels grow downward.
fn flipped(min: f64, max: f64, frame: &Frame) -> Scale {
    Scale::padded(min, max, frame.bottom, frame.top)
}

fn spaghetti_svg(series: &[SeriesLine], opts: &ChartOptions) -> Result<String, ChartError> {
    if series.is_empty() || series.iter().any(|s| s.xs.is_empty()) {
        return Err(ChartError::EmptyData);
    }
    for s in series {
        if s.xs.len() != s.ys.len() {
            return Err(ChartError::Stats(StatsError::LengthMismatch {
                left: s.xs.len(),
                right: s.ys.len(),
            }));
        }
    }
    let frame = Frame::new(opts, 75.0);
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &x in &s.xs {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
        }
        for &y in &s.ys {
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    }
    let sx = Scale::padded(x_min, x_max, frame.left, frame.right);
    let sy = flipped(y_min, y_max, &frame);

    let mut out = String::new();
    svg_open(&mut out, opts);
    y_axis(&mut out, &frame, &sy, true);
    x_axis(&mut out, &frame, &sx);
    let mut keys: Vec<&str> = Vec::new();
    for s in series {
        let color = color_for(&mut keys, &s.color_key);
        let points: Vec<String> =
            s.xs.iter()
                .zip(&s.ys)
                .map(|(x, y)| format!("{:.2},{:.2}", sx.px(*x), sy.px(*y)))
                .collect();
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            points.join(" ")
        );
    }
    // Legend only while it stays readable; dense fleets rely on color.
    if series.len() <= 12 {
        let mut keys: Vec<&str> = Vec::new();
        for (i, s) in series.iter().enumerate() {
            let color = color_for(&mut keys, &s.color_key);
            let y = frame.top + 14.0 * i as f64 + 8.0;
            let x0 = frame.right - 150.0;
            let _ = writeln!(
                out,
                "<line x1=\"{x0:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>",
                x0 + 18.0
            );
            let _ = writeln!(
                out,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
                x0 + 24.0,
                y + 4.0,
                escape_xml(&s.label)
            );
        }
    }
    axis_labels(&mut out, opts, &frame);
    out.push_str("</svg>\n");
    Ok(out)
}

fn histogram_svg(hist: &Histogram, opts: &ChartOptions) -> Result<String, ChartError> {
    if hist.bin_counts.is_empty() {
        return Err(ChartError::EmptyData);
    }
    let frame = Frame::new(opts, 75.0);
    let x_min = hist.bin_edges[0];
    let x_max = *hist.bin_edges.last().expect("edges non-empty");
    let y_max = *hist.bin_counts.iter().max().expect("counts non-empty") as f64;
    let sx = Scale::padded(x_min, x_max, frame.left, frame.right);
    let sy = flipped(0.0, y_max.max(1.0), &frame);

    let mut out = String::new();
    svg_open(&mut out, opts);
    y_axis(&mut out, &frame, &sy, true);
    x_axis(&mut out, &frame, &sx);
    let zero = sy.px(0.0);
    for (i, &count) in hist.bin_counts.iter().enumerate() {
        let x0 = sx.px(hist.bin_edges[i]);
        let x1 = sx.px(hist.bin_edges[i + 1]);
        let y = sy.px(count as f64);
        let _ = writeln!(
            out,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\" stroke=\"#ffffff\" stroke-width=\"0.5\"/>",
            x0,
            y,
            (x1 - x0).max(0.0),
            (zero - y).max(0.0),
            PALETTE[0]
        );
    }
    axis_labels(&mut out, opts, &frame);
    out.push_str("</svg>\n");
    Ok(out)
}

fn box_svg(groups: &[BoxGroup], opts: &ChartOptions) -> Result<String, ChartError> {
    if groups.is_empty() {
        return Err(ChartError::EmptyData);
    }
    let boxes: Vec<crate::stats::TukeyBox> = groups
        .iter()
        .map(|g| tukey_box(&g.values))
        .collect::<Result<_, _>>()?;
    let frame = Frame::new(opts, 75.0);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for g in groups {
        for &v in &g.values {
            y_min = y_min.min(v);
            y_max = y_max.max(v);
        }
    }
    let sy = flipped(y_min, y_max, &frame);
    let slot = (frame.right - frame.left) / groups.len() as f64;
    let half_box = (slot * 0.3).min(40.0);

    let mut out = String::new();
    svg_open(&mut out, opts);
    y_axis(&mut out, &frame, &sy, true);
    // Category axis: one tick per group.
    let _ = writeln!(
        out,
        "<line x1=\"{:.2}\" y1=\"{b:.2}\" x2=\"{:.2}\" y2=\"{b:.2}\" stroke=\"#333333\" stroke-width=\"1\"/>",
        frame.left,
        frame.right,
        b = frame.bottom
    );
    for (i, (g, b)) in groups.iter().zip(&boxes).enumerate() {
        let cx = frame.left + slot * (i as f64 + 0.5);
        let _ = writeln!(
            out,
            "<text x=\"{cx:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
            frame.bottom + 18.0,
            escape_xml(&g.label)
        );
        let color = PALETTE[0];
        let (yq1, yq3) = (sy.px(b.q1), sy.px(b.q3));
        let (ylo, yhi) = (sy.px(b.lower_adjacent), sy.px(b.upper_adjacent));
        // Whiskers with end caps.
        let _ = writeln!(
            out,
            "<line x1=\"{cx:.2}\" y1=\"{ylo:.2}\" x2=\"{cx:.2}\" y2=\"{yq1:.2}\" stroke=\"#333333\" stroke-width=\"1\"/>"
        );
        let _ = writeln!(
            out,
            "<line x1=\"{cx:.2}\" y1=\"{yq3:.2}\" x2=\"{cx:.2}\" y2=\"{yhi:.2}\" stroke=\"#333333\" stroke-width=\"1\"/>"
        );
        for y in [ylo, yhi] {
            let _ = writeln!(
                out,
                "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#333333\" stroke-width=\"1\"/>",
                cx - half_box / 2.0,
                cx + half_box / 2.0
            );
        }
        let _ = writeln!(
            out,
            "<rect x=\"{:.2}\" y=\"{yq3:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{color}\" fill-opacity=\"0.35\" stroke=\"#333333\" stroke-width=\"1\"/>",
            cx - half_box,
            2.0 * half_box,
            (yq1 - yq3).max(0.0)
        );
        let ymed = sy.px(b.median);
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{ymed:.2}\" x2=\"{:.2}\" y2=\"{ymed:.2}\" stroke=\"#333333\" stroke-width=\"2\"/>",
            cx - half_box,
            cx + half_box
        );
        for &o in &b.outliers {
            let _ = writeln!(
                out,
                "<circle cx=\"{cx:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>",
                sy.px(o)
            );
        }
    }
    axis_labels(&mut out, opts, &frame);
    out.push_str("</svg>\n");
    Ok(out)
}

fn ci_dot_svg(points: &[CiPoint], opts: &ChartOptions) -> Result<String, ChartError> {
    if points.is_empty() {
        return Err(ChartError::EmptyData);
    }
    let frame = Frame::new(opts, 190.0);
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        x_min = x_min.min(p.lower);
        x_max = x_max.max(p.upper);
    }
    let sx = Scale::padded(x_min, x_max, frame.left, frame.right);
    let row_h = (frame.bottom - frame.top) / points.len() as f64;

    let mut out = String::new();
    svg_open(&mut out, opts);
    x_axis(&mut out, &frame, &sx);
    // Zero reference when the range straddles it.
    if sx.d_min < 0.0 && sx.d_max() > 0.0 {
        let x0 = sx.px(0.0);
        let _ = writeln!(
            out,
            "<line x1=\"{x0:.2}\" y1=\"{:.2}\" x2=\"{x0:.2}\" y2=\"{:.2}\" stroke=\"#999999\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>",
            frame.top,
            frame.bottom
        );
    }
    let mut keys: Vec<&str> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let cy = frame.top + row_h * (i as f64 + 0.5);
        let color = color_for(&mut keys, &p.color_key);
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>",
            frame.left - 8.0,
            cy + 4.0,
            escape_xml(&p.label)
        );
        let (xl, xu) = (sx.px(p.lower), sx.px(p.upper));
        let _ = writeln!(
            out,
            "<line x1=\"{xl:.2}\" y1=\"{cy:.2}\" x2=\"{xu:.2}\" y2=\"{cy:.2}\" stroke=\"{color}\" stroke-width=\"1.5\"/>"
        );
        for x in [xl, xu] {
            let _ = writeln!(
                out,
                "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                cy - 4.0,
                cy + 4.0
            );
        }
        let _ = writeln!(
            out,
            "<circle cx=\"{:.2}\" cy=\"{cy:.2}\" r=\"3.5\" fill=\"{color}\"/>",
            sx.px(p.estimate)
        );
    }
    axis_labels(&mut out, opts, &frame);
    out.push_str("</svg>\n");
    Ok(out)
}

fn scatter_svg(points: &[(f64, f64)], opts: &ChartOptions) -> Result<String, ChartError> {
    if points.is_empty() {
        return Err(ChartError::EmptyData);
    }
    let frame = Frame::new(opts, 75.0);
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    let sx = Scale::padded(x_min, x_max, frame.left, frame.right);
    let sy = flipped(y_min, y_max, &frame);

    let mut out = String::new();
    svg_open(&mut out, opts);
    y_axis(&mut out, &frame, &sy, true);
    x_axis(&mut out, &frame, &sx);
    for &(x, y) in points {
        let _ = writeln!(
            out,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{}\" fill-opacity=\"0.7\"/>",
            sx.px(x),
            sy.px(y),
            PALETTE[0]
        );
    }
    axis_labels(&mut out, opts, &frame);
    out.push_str("</svg>\n");
    Ok(out)
}
