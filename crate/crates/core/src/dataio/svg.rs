//! Standalone SVG charts: line, histogram and scatter.
//!
//! Output depends only on the spec. Coordinates are printed with two
//! decimals so identical specs give identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChartError {
    #[error("chart has no data")]
    EmptySeries,
    #[error("io failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    Line,
    /// Bins the `y` values of the first series.
    Histogram,
    Scatter,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartSeries {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub kind: ChartKind,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<ChartSeries>,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_bins() -> usize {
    10
}

impl ChartSpec {
    pub fn new(kind: ChartKind, title: &str, x_label: &str, y_label: &str) -> ChartSpec {
        ChartSpec {
            kind,
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            series: Vec::new(),
            bins: default_bins(),
        }
    }

    pub fn with_series(mut self, name: &str, points: Vec<(f64, f64)>) -> ChartSpec {
        self.series.push(ChartSeries {
            name: name.to_string(),
            points,
        });
        self
    }
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn fmt_tick(v: f64) -> String {
    let v = if v.abs() < 1e-12 { 0.0 } else { v };
    if (v - v.round()).abs() < 1e-9 {
        format!("{}", v.round() as i64)
    } else {
        format!("{v:.2}")
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(xs: (f64, f64), ys: (f64, f64)) -> Frame {
        let pad = |(a, b): (f64, f64)| {
            if (b - a).abs() < 1e-12 {
                (a - 1.0, b + 1.0)
            } else {
                (a, b)
            }
        };
        let (x0, x1) = pad(xs);
        let (y0, y1) = pad(ys);
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

fn axes(out: &mut String, f: &Frame, spec: &ChartSpec) {
    let (bx, by) = (H - BOTTOM, LEFT);
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{by:.2}" y1="{bx:.2}" x2="{:.2}" y2="{bx:.2}" stroke="black"/>"#,
        W - RIGHT
    );
    let _ = writeln!(
        out,
        r#"<line class="axis" x1="{by:.2}" y1="{TOP:.2}" x2="{by:.2}" y2="{bx:.2}" stroke="black"/>"#
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = f.x0 + t * (f.x1 - f.x0);
        let yv = f.y0 + t * (f.y1 - f.y0);
        let _ = writeln!(
            out,
            r#"<text class="tick" x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
            f.px(xv),
            bx + 16.0,
            fmt_tick(xv)
        );
        let _ = writeln!(
            out,
            r#"<text class="tick" x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
            by - 6.0,
            f.py(yv) + 4.0,
            fmt_tick(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="16" text-anchor="middle">{}</text>"#,
        W / 2.0,
        TOP - 14.0,
        escape(&spec.title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
        LEFT + (W - LEFT - RIGHT) / 2.0,
        H - 16.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        TOP + (H - TOP - BOTTOM) / 2.0,
        TOP + (H - TOP - BOTTOM) / 2.0,
        escape(&spec.y_label)
    );
}

/// Histogram bin counts over `[lo, hi]`; the top edge falls in the last bin.
pub fn bin_counts(values: &[f64], bins: usize) -> (f64, f64, Vec<usize>) {
    let (lo, hi) = bounds(values.iter().copied());
    let bins = bins.max(1);
    let width = if hi > lo {
        (hi - lo) / bins as f64
    } else {
        1.0
    };
    let mut counts = vec![0usize; bins];
    for v in values {
        let i = (((v - lo) / width).floor() as usize).min(bins - 1);
        counts[i] += 1;
    }
    (lo, lo + width * bins as f64, counts)
}

pub fn render_chart(spec: &ChartSpec) -> Result<String, ChartError> {
    if spec.series.is_empty() || spec.series.iter().all(|s| s.points.is_empty()) {
        return Err(ChartError::EmptySeries);
    }
    let mut body = String::new();
    match spec.kind {
        ChartKind::Histogram => {
            let values: Vec<f64> = spec.series[0].points.iter().map(|p| p.1).collect();
            if values.is_empty() {
                return Err(ChartError::EmptySeries);
            }
            let (lo, hi, counts) = bin_counts(&values, spec.bins);
            let max = *counts.iter().max().expect("at least one bin") as f64;
            let f = Frame::new((lo, hi), (0.0, max));
            axes(&mut body, &f, spec);
            let width = (hi - lo) / counts.len() as f64;
            for (i, c) in counts.iter().enumerate() {
                let a = lo + i as f64 * width;
                let (x0, x1) = (f.px(a), f.px(a + width));
                let (ytop, ybase) = (f.py(*c as f64), f.py(0.0));
                let _ = writeln!(
                    body,
                    r#"<rect class="bar" x="{x0:.2}" y="{ytop:.2}" width="{:.2}" height="{:.2}" fill="{}" stroke="white"/>"#,
                    x1 - x0,
                    ybase - ytop,
                    PALETTE[0]
                );
            }
        }
        ChartKind::Line | ChartKind::Scatter => {
            let all = || spec.series.iter().flat_map(|s| s.points.iter());
            let f = Frame::new(bounds(all().map(|p| p.0)), bounds(all().map(|p| p.1)));
            axes(&mut body, &f, spec);
            for (k, s) in spec.series.iter().enumerate() {
                let color = PALETTE[k % PALETTE.len()];
                if spec.kind == ChartKind::Line && s.points.len() > 1 {
                    let pts: Vec<String> = s
                        .points
                        .iter()
                        .map(|(x, y)| format!("{:.2},{:.2}", f.px(*x), f.py(*y)))
                        .collect();
                    let _ = writeln!(
                        body,
                        r#"<polyline class="series" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                        pts.join(" ")
                    );
                }
                for (x, y) in &s.points {
                    let _ = writeln!(
                        body,
                        r#"<circle class="marker" cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                        f.px(*x),
                        f.py(*y)
                    );
                }
            }
            if spec.series.len() > 1 {
                for (k, s) in spec.series.iter().enumerate() {
                    let _ = writeln!(
                        body,
                        r#"<text class="legend" x="{:.2}" y="{:.2}" font-size="11" fill="{}">{}</text>"#,
                        W - RIGHT - 120.0,
                        TOP + 14.0 * (k as f64 + 1.0),
                        PALETTE[k % PALETTE.len()],
                        escape(&s.name)
                    );
                }
            }
        }
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    out.push_str(&body);
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn write_chart(spec: &ChartSpec, path: &Path) -> Result<(), ChartError> {
    let svg = render_chart(spec)?;
    fs::write(path, svg).map_err(|source| ChartError::Io {
        path: path.display().to_string(),
        source,
    })
}
