//! Curve serialization (CSV + JSON manifest sidecars) and SVG
//! phase-diagram rendering.
//!
//! Output is deterministic: floats are written with 9 significant
//! digits, rows follow point order, and the SVG is a pure function of
//! the plot specification.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::CellSize;
use crate::sweep::{Curve, CurveKind, CurvePoint, Manifest};

/// CSV column header shared by all curve files.
pub const CSV_HEADER: &str = "criterion,n,L1,L2,J,h,T,value,unique";

/// Formats a float with 9 significant digits, scientific notation.
fn fmt_float(v: f64) -> String {
    format!("{v:.8e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

/// Whether a curve point certifies uniqueness: located boundary points
/// report the literal comparison with the threshold, "none" points
/// passed on the whole scan, truncated points did not.
fn point_unique(curve: &Curve, point: &CurvePoint) -> bool {
    match point.value {
        Some(v) => v < curve.threshold,
        None => true,
    }
}

/// Renders a curve as CSV text (UTF-8, LF line endings); missing
/// boundary values serialize as empty fields.
pub fn curve_to_csv(curve: &Curve) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for point in &curve.points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            curve.criterion.as_str(),
            curve.n,
            curve.l1,
            curve.l2,
            fmt_float(curve.j),
            fmt_opt(point.h),
            fmt_opt(point.t),
            fmt_opt(point.value),
            point_unique(curve, point),
        ));
    }
    out
}

pub fn write_csv(curve: &Curve, path: &Path) -> Result<()> {
    fs::write(path, curve_to_csv(curve)).map_err(|e| Error::io(path, e))
}

/// Writes the JSON manifest sidecar for a curve.
pub fn write_manifest(manifest: &Manifest, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest)
        .expect("manifest serialization cannot fail");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_field(token: &str, line: usize) -> Result<Option<f64>> {
    let t = token.trim();
    if t.is_empty() {
        return Ok(None);
    }
    t.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::Parse {
            line,
            message: format!("expected a number or empty field, got {t:?}"),
        })
}

/// Reads an externally produced `(h, T)` curve, e.g. a published
/// phase-transition line, for plotting alongside computed curves.
///
/// The file must be a CSV with at least `h` and `T` columns (our own
/// curve files qualify). The result is tagged as an overlay and never
/// enters criterion computations.
pub fn read_overlay(path: &Path) -> Result<Curve> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_overlay(&text)
}

pub fn parse_overlay(text: &str) -> Result<Curve> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let h_col = columns.iter().position(|c| *c == "h").ok_or(Error::Parse {
        line: 1,
        message: "missing h column".into(),
    })?;
    let t_col = columns.iter().position(|c| *c == "T").ok_or(Error::Parse {
        line: 1,
        message: "missing T column".into(),
    })?;
    let value_col = columns.iter().position(|c| *c == "value");
    let mut points = Vec::new();
    for (idx, row) in lines {
        let line = idx + 1;
        if row.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        let need = h_col.max(t_col) + 1;
        if fields.len() < need {
            return Err(Error::Parse {
                line,
                message: format!("expected at least {need} fields, got {}", fields.len()),
            });
        }
        points.push(CurvePoint {
            h: parse_field(fields[h_col], line)?,
            t: parse_field(fields[t_col], line)?,
            value: value_col
                .and_then(|c| fields.get(c).copied())
                .map(|f| parse_field(f, line))
                .transpose()?
                .flatten(),
        });
    }
    Ok(Curve {
        criterion: CurveKind::Overlay,
        n: 1,
        l1: CellSize::Finite(1),
        l2: CellSize::Finite(1),
        j: 1.0,
        threshold: 0.0,
        points,
        manifest: Manifest {
            command: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            params: serde_json::json!({ "source": "overlay" }),
            grids: serde_json::Value::Null,
            tolerances: serde_json::Value::Null,
            placement_mode: None,
            timestamp: None,
            warnings: Vec::new(),
        },
    })
}

/// One curve on a plot, with its legend label.
#[derive(Debug, Clone)]
pub struct PlotEntry {
    pub curve: Curve,
    pub label: String,
}

/// A multi-curve phase-diagram plot: field amplitude on the horizontal
/// axis, temperature on the vertical axis, both in units of J.
#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub entries: Vec<PlotEntry>,
    pub width: u32,
    pub height: u32,
}

impl PlotSpec {
    pub fn new(title: impl Into<String>) -> Self {
        PlotSpec {
            title: title.into(),
            x_label: "h/J".into(),
            y_label: "T/J".into(),
            entries: Vec::new(),
            width: 720,
            height: 540,
        }
    }

    pub fn with_entry(mut self, curve: Curve, label: impl Into<String>) -> Self {
        self.entries.push(PlotEntry {
            curve,
            label: label.into(),
        });
        self
    }
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Tick positions at a "nice" step (1, 2 or 5 times a power of ten)
/// covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let range = (hi - lo).max(1e-12);
    let raw = range / 8.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&s| range / s <= 8.0)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * range {
        // Snap values that are ~0 to zero so labels do not show -0.
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v}");
    if s.len() <= 6 {
        s
    } else {
        format!("{v:.3}")
    }
}

/// Renders the plot as a standalone SVG 1.1 document.
pub fn render_svg_string(plot: &PlotSpec) -> Result<String> {
    if plot.entries.is_empty() {
        return Err(Error::Parameter("plot must contain at least one curve".into()));
    }
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for entry in &plot.entries {
        for p in &entry.curve.points {
            if let (Some(h), Some(t)) = (p.h, p.t) {
                xs.push(h);
                ys.push(t);
            }
        }
    }
    if xs.is_empty() {
        return Err(Error::Parameter("no plottable points: every curve is empty or all-none".into()));
    }
    let (x_min, x_max) = bounds_with_margin(&xs);
    let (y_min, y_max) = bounds_with_margin(&ys);

    let width = f64::from(plot.width);
    let height = f64::from(plot.height);
    let (left, right, top, bottom) = (64.0, 168.0, 42.0, 54.0);
    let plot_w = width - left - right;
    let plot_h = height - top - bottom;
    let to_px = |h: f64, t: f64| -> (f64, f64) {
        (
            left + (h - x_min) / (x_max - x_min) * plot_w,
            top + plot_h - (t - y_min) / (y_max - y_min) * plot_h,
        )
    };

    let mut svg = String::new();
    svg.push_str(r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    svg.push('\n');
    svg.push_str(&format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        plot.width, plot.height, plot.width, plot.height
    ));
    svg.push('\n');
    svg.push_str(&format!(
        r#"<rect x="0" y="0" width="{}" height="{}" fill="white"/>"#,
        plot.width, plot.height
    ));
    svg.push('\n');
    svg.push_str(&format!(
        r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        left + plot_w / 2.0,
        xml_escape(&plot.title)
    ));
    svg.push('\n');

    // Axes, ticks, grid.
    for tx in ticks(x_min, x_max) {
        let (px, _) = to_px(tx, y_min);
        svg.push_str(&format!(
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#dddddd" stroke-width="1"/>"#,
            top,
            top + plot_h
        ));
        svg.push_str(&format!(
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black" stroke-width="1"/>"#,
            top + plot_h,
            top + plot_h + 5.0
        ));
        svg.push_str(&format!(
            r#"<text x="{px:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            top + plot_h + 18.0,
            fmt_tick(tx)
        ));
        svg.push('\n');
    }
    for ty in ticks(y_min, y_max) {
        let (_, py) = to_px(x_min, ty);
        svg.push_str(&format!(
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#dddddd" stroke-width="1"/>"#,
            left,
            left + plot_w
        ));
        svg.push_str(&format!(
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="black" stroke-width="1"/>"#,
            left - 5.0,
            left
        ));
        svg.push_str(&format!(
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            left - 8.0,
            py + 4.0,
            fmt_tick(ty)
        ));
        svg.push('\n');
    }
    svg.push_str(&format!(
        r#"<rect x="{left:.2}" y="{top:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black" stroke-width="1"/>"#
    ));
    svg.push('\n');
    svg.push_str(&format!(
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        left + plot_w / 2.0,
        height - 12.0,
        xml_escape(&plot.x_label)
    ));
    svg.push('\n');
    svg.push_str(&format!(
        r#"<text x="18" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        top + plot_h / 2.0,
        top + plot_h / 2.0,
        xml_escape(&plot.y_label)
    ));
    svg.push('\n');

    // Curves.
    for (idx, entry) in plot.entries.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let dash = if entry.curve.criterion == CurveKind::Overlay {
            r#" stroke-dasharray="6 3""#
        } else {
            ""
        };
        let mut coords = String::new();
        for p in &entry.curve.points {
            if let (Some(h), Some(t)) = (p.h, p.t) {
                let (px, py) = to_px(h, t);
                if !coords.is_empty() {
                    coords.push(' ');
                }
                coords.push_str(&format!("{px:.2},{py:.2}"));
            }
        }
        if !coords.is_empty() {
            svg.push_str(&format!(
                r#"<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#
            ));
            svg.push('\n');
        }
        // Legend row.
        let ly = top + 14.0 + 20.0 * idx as f64;
        let lx = left + plot_w + 14.0;
        svg.push_str(&format!(
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            lx + 26.0
        ));
        svg.push_str(&format!(
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text>"#,
            lx + 32.0,
            ly + 4.0,
            xml_escape(&entry.label)
        ));
        svg.push('\n');
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn bounds_with_margin(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = (hi - lo) * 0.04;
        (lo - pad, hi + pad)
    }
}

pub fn render_svg(plot: &PlotSpec, path: &Path) -> Result<()> {
    let svg = render_svg_string(plot)?;
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}
