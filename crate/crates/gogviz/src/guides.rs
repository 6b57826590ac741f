//! Guide layer: axes (lines, ticks, grid, labels, titles) for every
//! coordinate system, and legends for non-spatial scales.

use crate::coords::{AxisGeom, CoordSystem, PlotFrame};
use crate::scales::{ResolvedScale, ScaleError, RangeValue};
use crate::scene::{RenderCommand, Style, TextAnchor};
use crate::transform::VariableFn;
use crate::value::DataValue;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GuideError {
    #[error("degenerate domain ({0}, {1})")]
    DegenerateDomain(f64, f64),
    #[error("axis references scale {0:?} which was never resolved")]
    UnlinkedScale(String),
    #[error("orient {orient:?} is not legal for a {axis} axis")]
    BadOrient { orient: String, axis: String },
    #[error("legends need a discrete range (ordinal or quantile scale)")]
    ContinuousRangeUnsupported,
    #[error("axes need a spatial scale with a numeric range")]
    NonSpatialScale,
    #[error(transparent)]
    Scale(#[from] ScaleError),
}

/// Which positional dimension an axis describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisRole {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orient {
    Left,
    Right,
    Top,
    Bottom,
    /// Default placement for the axis type (bottom for x, left for y);
    /// also the only orient of parallel axes.
    Edge,
}

impl Orient {
    pub fn parse(s: &str) -> Option<Orient> {
        match s {
            "left" => Some(Orient::Left),
            "right" => Some(Orient::Right),
            "top" => Some(Orient::Top),
            "bottom" => Some(Orient::Bottom),
            "edge" => Some(Orient::Edge),
            _ => None,
        }
    }
}

/// Font and color of axis tick labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TextStyle {
    pub font: String,
    pub color: String,
}

impl Default for TextStyle {
    fn default() -> TextStyle {
        TextStyle { font: "10px sans-serif".into(), color: "#000000".into() }
    }
}

/// Axis title block.
#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub title: String,
    /// `edge` (outer end, the default) or `middle`.
    pub position: String,
    pub font: String,
    pub color: String,
}

/// Where an axis takes its values from: a declared scale, or a dataset
/// field (normalized with a default linear scale over its extent).
#[derive(Debug, Clone, PartialEq)]
pub enum AxisSource {
    Scale(String),
    Field { data: String, field: String },
}

/// One axis declaration from the spec.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisSpec {
    pub role: AxisRole,
    pub source: AxisSource,
    pub orient: Orient,
    pub grid: bool,
    pub ticks: usize,
    pub text: TextStyle,
    pub annotation: Option<Annotation>,
    /// Applied to the axis's field values before scaling.
    pub transform: Option<VariableFn>,
}

/// A legend declaration from the spec's `guides` block.
#[derive(Debug, Clone, PartialEq)]
pub struct GuideSpec {
    pub scale: String,
    pub title: Option<String>,
    pub position: Option<(f64, f64)>,
}

pub const DEFAULT_TICK_TARGET: usize = 5;
const TICK_LEN: f64 = 4.0;

/// Ticks at multiples of the smallest step from {1, 2, 5}·10^k that yields
/// at most `target` intervals inside the domain.
pub fn nice_ticks(domain: (f64, f64), target: usize) -> Result<Vec<f64>, GuideError> {
    let (d0, d1) = domain;
    // rejects d0 >= d1 and either value being NaN
    if d0.partial_cmp(&d1) != Some(std::cmp::Ordering::Less) {
        return Err(GuideError::DegenerateDomain(d0, d1));
    }
    let target = target.max(2);
    let span = d1 - d0;
    let k_min = (span / (target as f64 * 10.0)).log10().floor() as i32;
    for k in k_min..k_min + 40 {
        for m in [1.0, 2.0, 5.0] {
            let step = m * 10f64.powi(k);
            let lo = (d0 / step - 1e-9).ceil() as i64;
            let hi = (d1 / step + 1e-9).floor() as i64;
            let count = hi - lo + 1;
            if count >= 1 && (count - 1) as usize <= target {
                let ticks: Vec<f64> = (lo..=hi)
                    .map(|i| i as f64 * step)
                    .filter(|t| *t >= d0 - 1e-9 * step && *t <= d1 + 1e-9 * step)
                    .collect();
                if !ticks.is_empty() {
                    return Ok(ticks);
                }
            }
        }
    }
    // unreachable for finite non-degenerate domains
    Err(GuideError::DegenerateDomain(d0, d1))
}

/// Shortest decimal representation with at most 6 significant digits;
/// scientific notation for |v| ≥ 1e6 or below 1e-4. The single source of
/// truth for tick labels, text marks, and legend labels.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if !(1e-4..1e6).contains(&a) {
        let s = format!("{v:.5e}");
        // trim trailing mantissa zeros: "1.50000e6" -> "1.5e6"
        let (mantissa, exp) = s.split_once('e').expect("exp format");
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        return format!("{mantissa}e{exp}");
    }
    let digits_before = a.log10().floor() as i32;
    let decimals = (5 - digits_before).clamp(0, 12) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Display form of a data value in labels: numbers go through
/// [`format_number`], everything else through `Display`.
pub fn format_value(v: &DataValue) -> String {
    match v {
        DataValue::Number(n) => format_number(*n),
        other => other.to_string(),
    }
}

/// Everything needed to draw one cartesian-style axis.
pub struct AxisRender<'a> {
    pub role: AxisRole,
    pub scale: &'a ResolvedScale,
    pub orient: Orient,
    pub grid: bool,
    pub ticks: usize,
    pub text: &'a TextStyle,
    pub annotation: Option<&'a Annotation>,
    pub coords: &'a CoordSystem,
}

/// Tick positions (in range space) and their labels for a scale.
fn scale_ticks(scale: &ResolvedScale, target: usize) -> Result<Vec<(f64, String)>, GuideError> {
    if let Some(domain) = scale.interval_domain() {
        let values = nice_ticks(domain, target)?;
        values
            .into_iter()
            .map(|t| Ok((scale.apply_number(t)?, format_number(t))))
            .collect()
    } else if let ResolvedScale::OrdinalBand { domain, .. } = scale {
        Ok(domain
            .iter()
            .map(|c| {
                let pos = scale
                    .apply(c)
                    .expect("band scale is total on its domain")
                    .as_number()
                    .expect("band positions are numeric");
                (pos, format_value(c))
            })
            .collect())
    } else {
        Err(GuideError::NonSpatialScale)
    }
}

/// Emits axis line, tick marks, labels, optional grid lines, and the title.
///
/// Geometry is built in range space and placed through the coordinate
/// system, so flipped and equal coordinates reposition axes consistently.
pub fn render_axis(input: &AxisRender) -> Result<Vec<RenderCommand>, GuideError> {
    let (uext, vext) = match input.coords {
        CoordSystem::Cartesian { frame } | CoordSystem::Equal { frame, .. } => {
            (frame.inner_width(), frame.inner_height())
        }
        CoordSystem::Flip { frame } => (frame.inner_height(), frame.inner_width()),
        CoordSystem::Polar { .. } => (1.0, 1.0),
        // parallel axes render through render_parallel_axis
        CoordSystem::Parallel { frame, .. } | CoordSystem::PolarParallel { frame, .. } => {
            (frame.inner_width(), frame.inner_height())
        }
    };
    let orth = match input.role {
        AxisRole::X => vext,
        AxisRole::Y => uext,
    };
    // cross position and outward direction in the orthogonal dimension
    let (cross, outward) = match (input.role, input.orient) {
        (AxisRole::X, Orient::Bottom | Orient::Edge) => (0.0, -1.0),
        (AxisRole::X, Orient::Top) => (orth, 1.0),
        (AxisRole::Y, Orient::Left | Orient::Edge) => (0.0, -1.0),
        (AxisRole::Y, Orient::Right) => (orth, 1.0),
        (role, orient) => {
            return Err(GuideError::BadOrient {
                orient: format!("{orient:?}").to_lowercase(),
                axis: format!("{role:?}").to_lowercase(),
            })
        }
    };
    if matches!(input.coords, CoordSystem::Polar { .. }) {
        return render_polar_axis(input, cross);
    }

    let ticks = scale_ticks(input.scale, input.ticks)?;
    let (r0, r1) = input
        .scale
        .numeric_range()
        .ok_or(GuideError::NonSpatialScale)?;
    let (lo, hi) = (r0.min(r1), r0.max(r1));
    let place = |along: f64, across: f64| match input.role {
        AxisRole::X => input.coords.place(along, across),
        AxisRole::Y => input.coords.place(across, along),
    };
    let line_style = Style::stroked("#000000", 1.0);
    let grid_style = Style::stroked("#dddddd", 1.0);
    let mut out = Vec::new();

    // grid first so it stays behind the axis line
    if input.grid {
        for (pos, _) in &ticks {
            out.push(RenderCommand::Path {
                points: vec![place(*pos, 0.0), place(*pos, orth)],
                closed: false,
                style: grid_style.clone(),
            });
        }
    }
    out.push(RenderCommand::Path {
        points: vec![place(lo, cross), place(hi, cross)],
        closed: false,
        style: line_style.clone(),
    });
    for (pos, label) in &ticks {
        out.push(RenderCommand::Path {
            points: vec![place(*pos, cross), place(*pos, cross + outward * TICK_LEN)],
            closed: false,
            style: line_style.clone(),
        });
        let (anchor, offset) = match input.role {
            AxisRole::X => (TextAnchor::Middle, 14.0),
            AxisRole::Y => (
                if outward < 0.0 { TextAnchor::End } else { TextAnchor::Start },
                8.0,
            ),
        };
        let (x, y) = place(*pos, cross + outward * offset);
        out.push(RenderCommand::Text {
            x,
            y,
            content: label.clone(),
            font: input.text.font.clone(),
            anchor,
            style: Style::filled(input.text.color.clone()),
        });
    }
    if let Some(ann) = input.annotation {
        let (along, across) = if ann.position == "middle" {
            ((lo + hi) / 2.0, cross + outward * 28.0)
        } else {
            (hi, cross + outward * 28.0)
        };
        let (x, y) = place(along, across);
        out.push(RenderCommand::Text {
            x,
            y,
            content: ann.title.clone(),
            font: ann.font.clone(),
            anchor: TextAnchor::Middle,
            style: Style::filled(ann.color.clone()),
        });
    }
    Ok(out)
}

/// Minimal polar axes: the x role draws the outer circle with tick marks,
/// the y role a radial line at 12 o'clock with ticks along it.
fn render_polar_axis(input: &AxisRender, _cross: f64) -> Result<Vec<RenderCommand>, GuideError> {
    let frame = input.coords.frame();
    let (cx, cy) = frame.center();
    let r = frame.radius();
    let line_style = Style::stroked("#000000", 1.0);
    let ticks = scale_ticks(input.scale, input.ticks)?;
    let mut out = Vec::new();
    match input.role {
        AxisRole::X => {
            // outer circle as a 64-segment polyline, ticks pointing outward
            let n = 64;
            let points: Vec<(f64, f64)> = (0..=n)
                .map(|i| {
                    let a = -std::f64::consts::FRAC_PI_2
                        + 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                    (cx + r * a.cos(), cy + r * a.sin())
                })
                .collect();
            out.push(RenderCommand::Path { points, closed: false, style: line_style.clone() });
            for (frac, label) in &ticks {
                let a = -std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * frac;
                let (dx, dy) = (a.cos(), a.sin());
                out.push(RenderCommand::Path {
                    points: vec![
                        (cx + r * dx, cy + r * dy),
                        (cx + (r + TICK_LEN) * dx, cy + (r + TICK_LEN) * dy),
                    ],
                    closed: false,
                    style: line_style.clone(),
                });
                out.push(RenderCommand::Text {
                    x: cx + (r + 14.0) * dx,
                    y: cy + (r + 14.0) * dy,
                    content: label.clone(),
                    font: input.text.font.clone(),
                    anchor: TextAnchor::Middle,
                    style: Style::filled(input.text.color.clone()),
                });
            }
        }
        AxisRole::Y => {
            out.push(RenderCommand::Path {
                points: vec![(cx, cy), (cx, cy - r)],
                closed: false,
                style: line_style.clone(),
            });
            for (frac, label) in &ticks {
                let y = cy - r * frac;
                out.push(RenderCommand::Path {
                    points: vec![(cx, y), (cx - TICK_LEN, y)],
                    closed: false,
                    style: line_style.clone(),
                });
                out.push(RenderCommand::Text {
                    x: cx - 8.0,
                    y,
                    content: label.clone(),
                    font: input.text.font.clone(),
                    anchor: TextAnchor::End,
                    style: Style::filled(input.text.color.clone()),
                });
            }
        }
    }
    Ok(out)
}

/// One axis of a parallel (or polar parallel) layout: the axis line, ticks
/// across it, labels, and the title at the outer end. The scale must map
/// onto the (0, 1) axis fraction range.
pub fn render_parallel_axis(
    geom: &AxisGeom,
    scale: &ResolvedScale,
    tick_target: usize,
    text: &TextStyle,
    annotation: Option<&Annotation>,
) -> Result<Vec<RenderCommand>, GuideError> {
    let line_style = Style::stroked("#000000", 1.0);
    let mut out = vec![RenderCommand::Path {
        points: vec![geom.start, geom.end],
        closed: false,
        style: line_style.clone(),
    }];
    let (nx, ny) = geom.normal();
    for (frac, label) in scale_ticks(scale, tick_target)? {
        let (px, py) = geom.point_at(frac);
        out.push(RenderCommand::Path {
            points: vec![(px, py), (px + nx * TICK_LEN, py + ny * TICK_LEN)],
            closed: false,
            style: line_style.clone(),
        });
        out.push(RenderCommand::Text {
            x: px + nx * 16.0,
            y: py + ny * 16.0,
            content: label,
            font: text.font.clone(),
            anchor: TextAnchor::Middle,
            style: Style::filled(text.color.clone()),
        });
    }
    if let Some(ann) = annotation {
        // outer end of the axis, nudged past the tip
        let (dx, dy) = (geom.end.0 - geom.start.0, geom.end.1 - geom.start.1);
        let len = (dx * dx + dy * dy).sqrt().max(1e-9);
        out.push(RenderCommand::Text {
            x: geom.end.0 + dx / len * 12.0,
            y: geom.end.1 + dy / len * 12.0,
            content: ann.title.clone(),
            font: ann.font.clone(),
            anchor: TextAnchor::Middle,
            style: Style::filled(ann.color.clone()),
        });
    }
    Ok(out)
}

const LEGEND_ROW: f64 = 16.0;
const SWATCH: f64 = 10.0;

/// A vertical list of (swatch, label) pairs in domain order, title on top.
/// Color strings become filled squares, shape names symbol outlines, and
/// numeric range values sized circles.
pub fn render_legend(
    guide: &GuideSpec,
    scale: &ResolvedScale,
    frame: &PlotFrame,
) -> Result<Vec<RenderCommand>, GuideError> {
    let entries: Vec<(String, RangeValue)> = match scale {
        ResolvedScale::OrdinalDiscrete { domain, range } => domain
            .iter()
            .enumerate()
            .map(|(i, c)| (format_value(c), range[i % range.len()].clone()))
            .collect(),
        ResolvedScale::Quantile { sample, range } => {
            let m = range.len();
            let thresholds = crate::scales::quantile_thresholds(sample, m);
            let lo = sample.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = sample.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut bounds = vec![lo];
            bounds.extend(thresholds);
            bounds.push(hi);
            (0..m)
                .map(|i| {
                    (
                        format!("{} \u{2013} {}", format_number(bounds[i]), format_number(bounds[i + 1])),
                        range[i].clone(),
                    )
                })
                .collect()
        }
        _ => return Err(GuideError::ContinuousRangeUnsupported),
    };

    let (x0, y0) = guide
        .position
        .unwrap_or((frame.width - frame.padding + 6.0, frame.padding + 10.0));
    let mut out = Vec::new();
    out.push(RenderCommand::Text {
        x: x0,
        y: y0,
        content: guide.title.clone().unwrap_or_else(|| guide.scale.clone()),
        font: "10px sans-serif".into(),
        anchor: TextAnchor::Start,
        style: Style::filled("#000000"),
    });
    for (i, (label, value)) in entries.iter().enumerate() {
        let y = y0 + LEGEND_ROW * (i + 1) as f64;
        let swatch = match value {
            RangeValue::Text(s) if s.starts_with('#') => RenderCommand::Rect {
                x: x0,
                y: y - SWATCH + 1.0,
                w: SWATCH,
                h: SWATCH,
                style: Style::filled(s.clone()),
            },
            RangeValue::Text(s) => crate::geometry::symbol_command(
                s,
                x0 + SWATCH / 2.0,
                y - SWATCH / 2.0 + 1.0,
                8.0,
                Style::filled("#4c78a8"),
            )
            .map_err(|_| GuideError::ContinuousRangeUnsupported)?,
            RangeValue::Number(n) => RenderCommand::Circle {
                cx: x0 + SWATCH / 2.0,
                cy: y - SWATCH / 2.0 + 1.0,
                r: (n / 2.0).clamp(1.0, 8.0),
                style: Style::filled("#4c78a8"),
            },
        };
        out.push(swatch);
        out.push(RenderCommand::Text {
            x: x0 + SWATCH + 4.0,
            y,
            content: label.clone(),
            font: "10px sans-serif".into(),
            anchor: TextAnchor::Start,
            style: Style::filled("#000000"),
        });
    }
    Ok(out)
}
