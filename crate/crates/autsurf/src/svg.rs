//! Dependency-free SVG rendering of experiment results.
//!
//! Two figure families cover the toolkit's plots: [`line_plot`] draws one or
//! more series as polylines and/or markers over linear or logarithmic axes
//! (orbit trajectories, tube-mass curves, log-log drift fits), and
//! [`heatmap`] shades a [`Histogram`] grid (empirical measures and their
//! pushforwards). All output is a single self-contained SVG document string;
//! callers decide where to write it.

use crate::randdyn::Histogram;
use std::fmt::Write as _;
use thiserror::Error;

/// Errors of the SVG layer.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SvgError {
    /// Nothing drawable: empty series, no finite points, degenerate ranges.
    #[error("invalid plot input: {0}")]
    Invalid(String),
}

/// How a series is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesStyle {
    /// A connected polyline.
    Line,
    /// Markers only.
    Scatter,
    /// Polyline plus markers.
    LineMarkers,
}

/// One named data series.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    /// Legend label (empty hides the legend entry).
    pub label: String,
    /// Data points `[x, y]`.
    pub points: Vec<[f64; 2]>,
    /// Drawing style.
    pub style: SeriesStyle,
}

impl Series {
    /// A polyline series.
    pub fn line(label: &str, points: Vec<[f64; 2]>) -> Self {
        Self { label: label.to_string(), points, style: SeriesStyle::Line }
    }

    /// A marker-only series.
    pub fn scatter(label: &str, points: Vec<[f64; 2]>) -> Self {
        Self { label: label.to_string(), points, style: SeriesStyle::Scatter }
    }

    /// A polyline-with-markers series.
    pub fn line_markers(label: &str, points: Vec<[f64; 2]>) -> Self {
        Self { label: label.to_string(), points, style: SeriesStyle::LineMarkers }
    }
}

/// Layout and axis options of a line plot.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    /// Figure title.
    pub title: String,
    /// Horizontal axis label.
    pub x_label: String,
    /// Vertical axis label.
    pub y_label: String,
    /// Pixel width of the document.
    pub width: u32,
    /// Pixel height of the document.
    pub height: u32,
    /// Draw the horizontal axis on a base-10 logarithmic scale
    /// (non-positive x values are dropped).
    pub log_x: bool,
    /// Draw the vertical axis on a base-10 logarithmic scale
    /// (non-positive y values are dropped).
    pub log_y: bool,
}

impl PlotOptions {
    /// Default 720x480 linear-axis layout with the given title.
    pub fn new(title: &str) -> Self {
        Self {
            title: title.to_string(),
            x_label: String::new(),
            y_label: String::new(),
            width: 720,
            height: 480,
            log_x: false,
            log_y: false,
        }
    }

    /// Sets both axis labels.
    pub fn with_labels(mut self, x: &str, y: &str) -> Self {
        self.x_label = x.to_string();
        self.y_label = y.to_string();
        self
    }

    /// Sets the document size in pixels.
    pub fn with_size(mut self, width: u32, height: u32) -> Self {
        self.width = width;
        self.height = height;
        self
    }

    /// Switches the horizontal axis to a logarithmic scale.
    pub fn with_log_x(mut self) -> Self {
        self.log_x = true;
        self
    }

    /// Switches the vertical axis to a logarithmic scale.
    pub fn with_log_y(mut self) -> Self {
        self.log_y = true;
        self
    }
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 52.0;

/// Escapes a string for XML text and attribute content.
fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Compact human-readable number formatting for tick and legend labels.
fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    let s = if !(1e-4..1e6).contains(&a) {
        format!("{v:.3e}")
    } else if a >= 100.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.4}")
    };
    // trim trailing fraction zeros, keeping exponents intact
    if let Some(epos) = s.find(['e', 'E']) {
        let (mant, exp) = s.split_at(epos);
        let mant = if mant.contains('.') {
            mant.trim_end_matches('0').trim_end_matches('.')
        } else {
            mant
        };
        format!("{mant}{exp}")
    } else if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Pixel coordinate formatting.
fn px(v: f64) -> String {
    format!("{v:.2}")
}

/// About `target` round tick positions covering `[lo, hi]` (1-2-5 ladder).
fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) || !span.is_finite() {
        return vec![lo];
    }
    let raw = span / target.max(2) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm <= 1.5 {
        mag
    } else if norm <= 3.5 {
        2.0 * mag
    } else if norm <= 7.5 {
        5.0 * mag
    } else {
        10.0 * mag
    };
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        // snap near-zero ticks produced by rounding
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    /// Builds the axis from transformed data bounds, padding 5% each side.
    fn from_bounds(min: f64, max: f64, log: bool) -> Axis {
        let (mut lo, mut hi) = (min, max);
        if !(hi > lo) {
            let pad = lo.abs().max(1.0) * 0.1;
            lo -= pad;
            hi += pad;
        } else {
            let pad = (hi - lo) * 0.05;
            lo -= pad;
            hi += pad;
        }
        Axis { lo, hi, log }
    }

    /// Fraction of the axis span at transformed value `v`.
    fn frac(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }

    /// Tick positions in transformed coordinates with display labels.
    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let k_lo = self.lo.ceil() as i64;
            let k_hi = self.hi.floor() as i64;
            let decades: Vec<i64> = (k_lo..=k_hi).collect();
            if decades.len() >= 2 {
                return decades
                    .into_iter()
                    .map(|k| (k as f64, fmt_num(10f64.powi(k as i32))))
                    .collect();
            }
            // fewer than two decades: tick the 1-2-5 mantissa ladder
            let mut out = Vec::new();
            for k in (k_lo - 1)..=(k_hi + 1) {
                for m in [1.0f64, 2.0, 5.0] {
                    let t = k as f64 + m.log10();
                    if t >= self.lo && t <= self.hi {
                        out.push((t, fmt_num(m * 10f64.powi(k as i32))));
                    }
                }
            }
            out
        } else {
            nice_ticks(self.lo, self.hi, 5).into_iter().map(|t| (t, fmt_num(t))).collect()
        }
    }
}

/// Renders one or more series into a complete SVG document.
///
/// Non-finite points are dropped, as are non-positive coordinates on
/// logarithmic axes; at least one drawable point must remain.
pub fn line_plot(series: &[Series], opts: &PlotOptions) -> Result<String, SvgError> {
    if series.is_empty() {
        return Err(SvgError::Invalid("no series to draw".into()));
    }
    if opts.width < 100 || opts.height < 100 {
        return Err(SvgError::Invalid("figure smaller than 100x100 pixels".into()));
    }
    let transform = |p: &[f64; 2]| -> Option<[f64; 2]> {
        let [mut x, mut y] = *p;
        if !x.is_finite() || !y.is_finite() {
            return None;
        }
        if opts.log_x {
            if x <= 0.0 {
                return None;
            }
            x = x.log10();
        }
        if opts.log_y {
            if y <= 0.0 {
                return None;
            }
            y = y.log10();
        }
        Some([x, y])
    };
    let drawable: Vec<Vec<[f64; 2]>> =
        series.iter().map(|s| s.points.iter().filter_map(transform).collect()).collect();
    let all: Vec<[f64; 2]> = drawable.iter().flatten().copied().collect();
    if all.is_empty() {
        return Err(SvgError::Invalid("no finite drawable points".into()));
    }
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in &all {
        x_min = x_min.min(p[0]);
        x_max = x_max.max(p[0]);
        y_min = y_min.min(p[1]);
        y_max = y_max.max(p[1]);
    }
    let ax = Axis::from_bounds(x_min, x_max, opts.log_x);
    let ay = Axis::from_bounds(y_min, y_max, opts.log_y);

    let w = opts.width as f64;
    let h = opts.height as f64;
    let (pl, pr) = (MARGIN_LEFT, w - MARGIN_RIGHT);
    let (pt, pb) = (MARGIN_TOP, h - MARGIN_BOTTOM);
    let to_px = |p: &[f64; 2]| -> [f64; 2] {
        [pl + ax.frac(p[0]) * (pr - pl), pb - ay.frac(p[1]) * (pb - pt)]
    };

    let mut out = String::new();
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" \
         viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\">\n",
        opts.width, opts.height
    );
    let _ = writeln!(out, "<rect width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>", opts.width, opts.height);
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" fill=\"#111111\">{}</text>",
        px(w / 2.0),
        escape(&opts.title)
    );

    // grid and ticks
    for (t, label) in ax.ticks() {
        let x = pl + ax.frac(t) * (pr - pl);
        if !(pl - 0.5..=pr + 0.5).contains(&x) {
            continue;
        }
        let _ = writeln!(
            out,
            "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"#dddddd\" stroke-width=\"1\"/>",
            x0 = px(x),
            y0 = px(pt),
            y1 = px(pb)
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"11\" fill=\"#333333\">{}</text>",
            px(x),
            px(pb + 16.0),
            escape(&label)
        );
    }
    for (t, label) in ay.ticks() {
        let y = pb - ay.frac(t) * (pb - pt);
        if !(pt - 0.5..=pb + 0.5).contains(&y) {
            continue;
        }
        let _ = writeln!(
            out,
            "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"#dddddd\" stroke-width=\"1\"/>",
            x0 = px(pl),
            x1 = px(pr),
            y0 = px(y)
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"11\" fill=\"#333333\">{}</text>",
            px(pl - 6.0),
            px(y + 4.0),
            escape(&label)
        );
    }
    let _ = writeln!(
        out,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>",
        px(pl),
        px(pt),
        px(pr - pl),
        px(pb - pt)
    );

    // axis labels
    if !opts.x_label.is_empty() {
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\" fill=\"#111111\">{}</text>",
            px((pl + pr) / 2.0),
            px(h - 12.0),
            escape(&opts.x_label)
        );
    }
    if !opts.y_label.is_empty() {
        let _ = writeln!(
            out,
            "<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" font-size=\"12\" fill=\"#111111\" \
             transform=\"rotate(-90 16 {0})\">{1}</text>",
            px((pt + pb) / 2.0),
            escape(&opts.y_label)
        );
    }

    // series
    for (idx, (s, pts)) in series.iter().zip(&drawable).enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let draw_line = matches!(s.style, SeriesStyle::Line | SeriesStyle::LineMarkers);
        let draw_marks = matches!(s.style, SeriesStyle::Scatter | SeriesStyle::LineMarkers);
        if draw_line && pts.len() >= 2 {
            let coords: Vec<String> = pts
                .iter()
                .map(|p| {
                    let q = to_px(p);
                    format!("{},{}", px(q[0]), px(q[1]))
                })
                .collect();
            let _ = writeln!(
                out,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
                coords.join(" "),
                color
            );
        }
        if draw_marks {
            for p in pts {
                let q = to_px(p);
                let _ = writeln!(
                    out,
                    "<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"{}\"/>",
                    px(q[0]),
                    px(q[1]),
                    color
                );
            }
        }
    }

    // legend
    let labeled: Vec<(usize, &Series)> =
        series.iter().enumerate().filter(|(_, s)| !s.label.is_empty()).collect();
    if labeled.len() > 1 || (labeled.len() == 1 && series.len() > 1) {
        for (row, (idx, s)) in labeled.iter().enumerate() {
            let y = pt + 14.0 + row as f64 * 16.0;
            let color = PALETTE[idx % PALETTE.len()];
            let _ = writeln!(
                out,
                "<line x1=\"{}\" y1=\"{y0}\" x2=\"{}\" y2=\"{y0}\" stroke=\"{}\" stroke-width=\"2\"/>",
                px(pr - 110.0),
                px(pr - 90.0),
                color,
                y0 = px(y - 4.0)
            );
            let _ = writeln!(
                out,
                "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#111111\">{}</text>",
                px(pr - 84.0),
                px(y),
                escape(&s.label)
            );
        }
    }

    out.push_str("</svg>\n");
    Ok(out)
}

/// Four-stop blue color ramp for heatmap cells, `t` in `[0, 1]`.
fn ramp(t: f64) -> String {
    const STOPS: [(f64, [f64; 3]); 4] = [
        (0.0, [222.0, 235.0, 247.0]),
        (0.35, [107.0, 174.0, 214.0]),
        (0.7, [33.0, 113.0, 181.0]),
        (1.0, [8.0, 48.0, 107.0]),
    ];
    let t = t.clamp(0.0, 1.0);
    let mut rgb = STOPS[3].1;
    for w in STOPS.windows(2) {
        let (t0, c0) = w[0];
        let (t1, c1) = w[1];
        if t <= t1 {
            let u = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
            rgb = [
                c0[0] + u * (c1[0] - c0[0]),
                c0[1] + u * (c1[1] - c0[1]),
                c0[2] + u * (c1[2] - c0[2]),
            ];
            break;
        }
    }
    format!("#{:02x}{:02x}{:02x}", rgb[0].round() as u8, rgb[1].round() as u8, rgb[2].round() as u8)
}

/// Renders a histogram as a shaded-cell heatmap document.
///
/// Cells with zero counts stay white; positive counts are shaded on a
/// linear ramp against the largest bin. The subtitle reports the recorded
/// totals so the figure is self-describing.
pub fn heatmap(hist: &Histogram, title: &str) -> Result<String, SvgError> {
    if hist.total() == 0 {
        return Err(SvgError::Invalid("empty histogram".into()));
    }
    let (bx, by) = (hist.bins_x(), hist.bins_y());
    let max = *hist.counts().iter().max().expect("nonempty grid");
    let width = 640u32;
    let height = 560u32;
    let w = width as f64;
    let (pl, pr) = (MARGIN_LEFT, w - MARGIN_RIGHT);
    let (pt, pb) = (MARGIN_TOP + 14.0, height as f64 - MARGIN_BOTTOM);
    let cell_w = (pr - pl) / bx as f64;
    let cell_h = (pb - pt) / by as f64;

    let mut out = String::new();
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" \
         viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\">\n",
        width, height
    );
    let _ = writeln!(out, "<rect width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>");
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" fill=\"#111111\">{}</text>",
        px(w / 2.0),
        escape(title)
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"40\" text-anchor=\"middle\" font-size=\"11\" fill=\"#555555\">chart {} | {} counts | {} out of range | max bin {}</text>",
        px(w / 2.0),
        escape(hist.chart()),
        hist.total(),
        hist.out_of_range(),
        max
    );
    let _ = writeln!(
        out,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#ffffff\" stroke=\"none\"/>",
        px(pl),
        px(pt),
        px(pr - pl),
        px(pb - pt)
    );
    for iy in 0..by {
        for ix in 0..bx {
            let c = hist.counts()[iy * bx + ix];
            if c == 0 {
                continue;
            }
            let color = ramp(c as f64 / max as f64);
            let x = pl + ix as f64 * cell_w;
            let y = pb - (iy + 1) as f64 * cell_h;
            let _ = writeln!(
                out,
                "<rect class=\"cell\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>",
                px(x),
                px(y),
                px(cell_w + 0.05),
                px(cell_h + 0.05),
                color
            );
        }
    }
    let _ = writeln!(
        out,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>",
        px(pl),
        px(pt),
        px(pr - pl),
        px(pb - pt)
    );

    // axis ticks from the declared data ranges
    let (x_lo, x_hi) = hist.x_range();
    let (y_lo, y_hi) = hist.y_range();
    for t in nice_ticks(x_lo, x_hi, 5) {
        let fx = (t - x_lo) / (x_hi - x_lo);
        let x = pl + fx * (pr - pl);
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"11\" fill=\"#333333\">{}</text>",
            px(x),
            px(pb + 16.0),
            escape(&fmt_num(t))
        );
    }
    for t in nice_ticks(y_lo, y_hi, 5) {
        let fy = (t - y_lo) / (y_hi - y_lo);
        let y = pb - fy * (pb - pt);
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"11\" fill=\"#333333\">{}</text>",
            px(pl - 6.0),
            px(y + 4.0),
            escape(&fmt_num(t))
        );
    }

    // color legend: five sample swatches from the ramp
    let legend_y = height as f64 - 22.0;
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#333333\">0</text>",
        px(pl),
        px(legend_y + 9.0)
    );
    for k in 0..5 {
        let t = (k as f64 + 1.0) / 5.0;
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"18\" height=\"10\" fill=\"{}\"/>",
            px(pl + 12.0 + k as f64 * 18.0),
            px(legend_y),
            ramp(t)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#333333\">{}</text>",
        px(pl + 12.0 + 5.0 * 18.0 + 6.0),
        px(legend_y + 9.0),
        max
    );

    out.push_str("</svg>\n");
    Ok(out)
}
