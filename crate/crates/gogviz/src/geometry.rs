//! Geometry (marks) layer: converts scaled data rows into device-independent
//! draw commands. One function per mark family; all are pure, so identical
//! inputs always produce identical command lists.

use crate::coords::CoordSystem;
use crate::datastore::{DataError, DataTable};
use crate::guides::format_number;
use crate::scales::{ResolvedScale, ScaleError, ScaledValue};
use crate::scene::{palette_color, RenderCommand, Style, TextAnchor};
use crate::value::DataValue;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("channel {0:?} is required but unbound")]
    UnboundChannel(Channel),
    #[error("channel {channel:?}: {reason}")]
    BadBinding { channel: Channel, reason: String },
    #[error(transparent)]
    Scale(#[from] ScaleError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("stacked bars require non-negative values, got {0}")]
    NegativeStackValue(f64),
    #[error("arc values must be non-negative, got {0}")]
    NegativeValue(f64),
    #[error("arc values sum to zero")]
    ZeroTotal,
    #[error("unknown shape {0:?} (known: circle, square, triangle, cross, diamond)")]
    UnknownShape(String),
}

/// The mark families of the geometry layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeomKind {
    Point,
    Line,
    Area,
    Bar,
    VerticalBar,
    StackedBar,
    Histogram,
    Pie,
    Arc,
    HLine,
    VLine,
    Text,
    Picture,
    Marks,
}

impl GeomKind {
    pub fn parse(s: &str) -> Option<GeomKind> {
        match s {
            "Point" => Some(GeomKind::Point),
            "Line" => Some(GeomKind::Line),
            "Area" => Some(GeomKind::Area),
            "Bar" => Some(GeomKind::Bar),
            "VerticalBar" => Some(GeomKind::VerticalBar),
            "StackedBar" => Some(GeomKind::StackedBar),
            "Histogram" => Some(GeomKind::Histogram),
            "Pie" => Some(GeomKind::Pie),
            "Arc" => Some(GeomKind::Arc),
            "HLine" => Some(GeomKind::HLine),
            "VLine" => Some(GeomKind::VLine),
            "Text" => Some(GeomKind::Text),
            "Picture" => Some(GeomKind::Picture),
            "Marks" => Some(GeomKind::Marks),
            _ => None,
        }
    }

    pub const ALL: [&'static str; 14] = [
        "Point", "Line", "Area", "Bar", "VerticalBar", "StackedBar", "Histogram", "Pie", "Arc",
        "HLine", "VLine", "Text", "Picture", "Marks",
    ];
}

/// Visual channels a geometry can bind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Channel {
    X,
    Y,
    Y2,
    Fill,
    Stroke,
    Size,
    Shape,
    Label,
    InnerRadius,
    OuterRadius,
    StartAngle,
    EndAngle,
    Value,
    Group,
    Font,
}

impl Channel {
    /// Maps a spec property key to its channel; accepts both `color` and
    /// `colour` spellings.
    pub fn parse(key: &str) -> Option<Channel> {
        match key {
            "x" => Some(Channel::X),
            "y" => Some(Channel::Y),
            "y2" => Some(Channel::Y2),
            "fillColor" | "fillColour" => Some(Channel::Fill),
            "strokeColor" | "strokeColour" => Some(Channel::Stroke),
            "size" => Some(Channel::Size),
            "shape" => Some(Channel::Shape),
            "text" => Some(Channel::Label),
            "innerRadius" => Some(Channel::InnerRadius),
            "outerRadius" => Some(Channel::OuterRadius),
            "startAngle" => Some(Channel::StartAngle),
            "endAngle" => Some(Channel::EndAngle),
            "value" => Some(Channel::Value),
            "group" => Some(Channel::Group),
            "field" => Some(Channel::Value),
            "font" => Some(Channel::Font),
            _ => None,
        }
    }
}

/// A channel binding as written in the spec: a scale name, a field (with
/// optional scale), or a constant.
#[derive(Debug, Clone, PartialEq)]
pub enum BindingSpec {
    /// `"x": "xscale"` — the field comes from the scale's domain reference.
    ScaleName(String),
    /// `"x": {"field": "a", "scale": "xs"?}`.
    Field { field: String, scale: Option<String> },
    /// `{"value": 3}` / `{"value": "#ff0000"}` / bare literal, optionally
    /// routed through a scale.
    Const { value: ConstValue, scale: Option<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConstValue {
    Number(f64),
    Text(String),
}

/// A geometry declaration from the spec's `geom` block.
#[derive(Debug, Clone, PartialEq)]
pub struct GeomSpec {
    pub kind: GeomKind,
    pub data: String,
    pub bindings: BTreeMap<Channel, BindingSpec>,
    /// Histogram bin-count override.
    pub bins: Option<usize>,
}

/// A binding after link/assemble resolved scales and field indices.
#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedBinding {
    /// Row value of `field` mapped through `scale`.
    Scaled { field: usize, scale: ResolvedScale },
    /// Raw row value of `field`.
    Raw { field: usize },
    /// A constant mapped through a scale.
    ScaledConst { value: DataValue, scale: ResolvedScale },
    ConstNumber(f64),
    ConstText(String),
}

impl ResolvedBinding {
    /// Evaluates against one row; `None` means the input was null and the
    /// row should be skipped (or a default applied, per channel).
    pub fn eval(&self, row: &[DataValue]) -> Result<Option<ScaledValue>, GeomError> {
        match self {
            ResolvedBinding::Scaled { field, scale } => {
                let v = &row[*field];
                if v.is_null() {
                    return Ok(None);
                }
                Ok(Some(scale.apply(v)?))
            }
            ResolvedBinding::Raw { field } => Ok(match &row[*field] {
                DataValue::Null => None,
                DataValue::Number(n) => Some(ScaledValue::Number(*n)),
                DataValue::Text(s) => Some(ScaledValue::Text(s.clone())),
                DataValue::Bool(b) => Some(ScaledValue::Text(b.to_string())),
            }),
            ResolvedBinding::ScaledConst { value, scale } => Ok(Some(scale.apply(value)?)),
            ResolvedBinding::ConstNumber(n) => Ok(Some(ScaledValue::Number(*n))),
            ResolvedBinding::ConstText(s) => Ok(Some(ScaledValue::Text(s.clone()))),
        }
    }

    /// True when the binding varies per row.
    pub fn per_row(&self) -> bool {
        matches!(self, ResolvedBinding::Scaled { .. } | ResolvedBinding::Raw { .. })
    }
}

/// Everything a geometry function needs: the bound table, resolved channel
/// bindings, and the coordinate system.
pub struct GeomInput<'a> {
    pub table: &'a DataTable,
    pub bindings: BTreeMap<Channel, ResolvedBinding>,
    pub coords: &'a CoordSystem,
}

impl<'a> GeomInput<'a> {
    fn binding(&self, ch: Channel) -> Result<&ResolvedBinding, GeomError> {
        self.bindings.get(&ch).ok_or(GeomError::UnboundChannel(ch))
    }

    /// Numeric channel value for one row; `None` when the input was null.
    fn num(&self, ch: Channel, row: &[DataValue]) -> Result<Option<f64>, GeomError> {
        match self.binding(ch)?.eval(row)? {
            None => Ok(None),
            Some(ScaledValue::Number(v)) => Ok(Some(v)),
            Some(ScaledValue::Text(t)) => Err(GeomError::BadBinding {
                channel: ch,
                reason: format!("expected a number, scale produced {t:?}"),
            }),
        }
    }

    /// Like `num` but with a default for unbound channels.
    fn num_or(&self, ch: Channel, row: &[DataValue], default: f64) -> Result<f64, GeomError> {
        match self.bindings.get(&ch) {
            None => Ok(default),
            Some(b) => match b.eval(row)? {
                Some(ScaledValue::Number(v)) => Ok(v),
                Some(ScaledValue::Text(t)) => Err(GeomError::BadBinding {
                    channel: ch,
                    reason: format!("expected a number, got {t:?}"),
                }),
                None => Ok(default),
            },
        }
    }

    /// Color channel for one row, falling back to the palette default.
    fn color_or(
        &self,
        ch: Channel,
        row: &[DataValue],
        default: &str,
    ) -> Result<String, GeomError> {
        match self.bindings.get(&ch) {
            None => Ok(default.to_string()),
            Some(b) => match b.eval(row)? {
                Some(ScaledValue::Text(c)) => Ok(c),
                Some(ScaledValue::Number(n)) => Err(GeomError::BadBinding {
                    channel: ch,
                    reason: format!("expected a color, got number {n}"),
                }),
                None => Ok(default.to_string()),
            },
        }
    }

    /// Color for geoms that emit one command for the whole table (area,
    /// histogram, rules): only constant bindings apply; per-row bindings
    /// fall back to the default.
    fn const_color(&self, ch: Channel, default: &str) -> String {
        match self.bindings.get(&ch) {
            Some(ResolvedBinding::ConstText(c)) => c.clone(),
            _ => default.to_string(),
        }
    }

    /// Band geometry of the ordinal scale bound to a position channel.
    fn band(&self, ch: Channel) -> Result<(usize, (f64, f64)), GeomError> {
        match self.binding(ch)? {
            ResolvedBinding::Scaled { scale: ResolvedScale::OrdinalBand { domain, range }, .. } => {
                Ok((domain.len(), *range))
            }
            _ => Err(GeomError::BadBinding {
                channel: ch,
                reason: "bar position needs an ordinal scale with a continuous range".into(),
            }),
        }
    }

    /// The y channel's scale applied to a raw domain value (the bar/area
    /// zero line).
    fn scale_of(&self, ch: Channel, v: f64) -> Result<f64, GeomError> {
        match self.binding(ch)? {
            ResolvedBinding::Scaled { scale, .. } | ResolvedBinding::ScaledConst { scale, .. } => {
                Ok(scale.apply_number(v)?)
            }
            _ => Err(GeomError::BadBinding {
                channel: ch,
                reason: "needs a scale-bound channel".into(),
            }),
        }
    }
}

const DEFAULT_POINT_RADIUS: f64 = 3.0;
const DEFAULT_MARK_SIZE: f64 = 6.0;
const BAR_FILL_FRACTION: f64 = 0.8;
const DEFAULT_GLYPH_SIZE: f64 = 12.0;
const DEFAULT_FONT: &str = "10px sans-serif";
const DEFAULT_LINE_WIDTH: f64 = 1.5;

/// One circle per row with non-null x and y; radius from the size channel
/// (default 3 px), fill from the color channel (default palette 0).
pub fn geom_point(
    input: &GeomInput,
    warnings: &mut Vec<String>,
) -> Result<Vec<RenderCommand>, GeomError> {
    let mut out = Vec::new();
    for (i, row) in input.table.rows().iter().enumerate() {
        let (u, v) = match (input.num(Channel::X, row)?, input.num(Channel::Y, row)?) {
            (Some(u), Some(v)) => (u, v),
            _ => {
                warnings.push(format!("point: row {i} skipped (null position)"));
                continue;
            }
        };
        let (cx, cy) = input.coords.place(u, v);
        let r = input.num_or(Channel::Size, row, DEFAULT_POINT_RADIUS)?;
        let fill = input.color_or(Channel::Fill, row, palette_color(0))?;
        let mut style = Style::filled(fill);
        if let Some(b) = input.bindings.get(&Channel::Stroke) {
            if let Some(ScaledValue::Text(c)) = b.eval(row)? {
                style.stroke = Some(c);
            }
        }
        out.push(RenderCommand::Circle { cx, cy, r, style });
    }
    Ok(out)
}

/// Open polylines through the rows in order; a null position breaks the
/// path, and runs shorter than two points are dropped with a warning.
pub fn geom_line(
    input: &GeomInput,
    warnings: &mut Vec<String>,
) -> Result<Vec<RenderCommand>, GeomError> {
    let stroke = match input.bindings.get(&Channel::Stroke) {
        Some(ResolvedBinding::ConstText(c)) => c.clone(),
        _ => palette_color(0).to_string(),
    };
    let mut out = Vec::new();
    let mut run: Vec<(f64, f64)> = Vec::new();
    let flush = |run: &mut Vec<(f64, f64)>, out: &mut Vec<RenderCommand>, warnings: &mut Vec<String>| {
        if run.len() >= 2 {
            out.push(RenderCommand::Path {
                points: std::mem::take(run),
                closed: false,
                style: Style::stroked(stroke.clone(), DEFAULT_LINE_WIDTH),
            });
        } else if run.len() == 1 {
            warnings.push("line: single-point run dropped".to_string());
            run.clear();
        }
    };
    for row in input.table.rows() {
        match (input.num(Channel::X, row)?, input.num(Channel::Y, row)?) {
            (Some(u), Some(v)) => run.push(input.coords.place(u, v)),
            _ => flush(&mut run, &mut out, warnings),
        }
    }
    flush(&mut run, &mut out, warnings);
    Ok(out)
}

/// One closed filled path: upper boundary through (x, y), lower boundary
/// through (x, y2) reversed. y2 defaults to the y scale applied to zero.
pub fn geom_area(
    input: &GeomInput,
    warnings: &mut Vec<String>,
) -> Result<Vec<RenderCommand>, GeomError> {
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    let has_y2 = input.bindings.contains_key(&Channel::Y2);
    let zero = if has_y2 { 0.0 } else { input.scale_of(Channel::Y, 0.0)? };
    for (i, row) in input.table.rows().iter().enumerate() {
        let (u, v) = match (input.num(Channel::X, row)?, input.num(Channel::Y, row)?) {
            (Some(u), Some(v)) => (u, v),
            _ => {
                warnings.push(format!("area: row {i} skipped (null position)"));
                continue;
            }
        };
        let v2 = if has_y2 {
            match input.num(Channel::Y2, row)? {
                Some(v2) => v2,
                None => {
                    warnings.push(format!("area: row {i} skipped (null y2)"));
                    continue;
                }
            }
        } else {
            zero
        };
        upper.push(input.coords.place(u, v));
        lower.push(input.coords.place(u, v2));
    }
    if upper.len() < 2 {
        warnings.push("area: fewer than two valid rows, nothing emitted".to_string());
        return Ok(Vec::new());
    }
    lower.reverse();
    upper.extend(lower);
    let fill = input.const_color(Channel::Fill, palette_color(0));
    Ok(vec![RenderCommand::Path {
        points: upper,
        closed: true,
        style: Style::filled(fill),
    }])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarVariant {
    /// Category on x, length rising along y. `VerticalBar` is the same
    /// preset under its own spec name.
    Plain,
    Stacked,
}

/// Bars rising from the y scale's zero line, 0.8 of the ordinal band wide.
/// Stacking adds segments per category in global group first-occurrence
/// order, each segment's base the running sum.
pub fn geom_bar(
    input: &GeomInput,
    variant: BarVariant,
    warnings: &mut Vec<String>,
) -> Result<Vec<RenderCommand>, GeomError> {
    let (n, range) = input.band(Channel::X)?;
    let band = ((range.1 - range.0) / n as f64).abs();
    let half = band * BAR_FILL_FRACTION / 2.0;
    let base_v = input.scale_of(Channel::Y, 0.0)?;
    let mut out = Vec::new();

    match variant {
        BarVariant::Plain => {
            for (i, row) in input.table.rows().iter().enumerate() {
                let (u, v) = match (input.num(Channel::X, row)?, input.num(Channel::Y, row)?) {
                    (Some(u), Some(v)) => (u, v),
                    _ => {
                        warnings.push(format!("bar: row {i} skipped (null position)"));
                        continue;
                    }
                };
                let fill = input.color_or(Channel::Fill, row, palette_color(0))?;
                out.push(rect_between(input.coords, u - half, base_v, u + half, v, Style::filled(fill)));
            }
        }
        BarVariant::Stacked => {
            let group_b = input.binding(Channel::Group)?.clone();
            // global group order for stable stacking and colors
            let mut groups: Vec<ScaledValue> = Vec::new();
            // (category center, group index) -> summed value
            let mut sums: Vec<((u64, usize), f64)> = Vec::new();
            for (i, row) in input.table.rows().iter().enumerate() {
                // the segment extent comes from the raw value (scaled via
                // running sums below); num() here only detects nulls
                let (u, raw) = match (input.num(Channel::X, row)?, raw_number(input, Channel::Y, row)?) {
                    (Some(u), Some(raw)) => (u, raw),
                    _ => {
                        warnings.push(format!("bar: row {i} skipped (null position)"));
                        continue;
                    }
                };
                let g = match group_b.eval(row)? {
                    Some(g) => g,
                    None => {
                        warnings.push(format!("bar: row {i} skipped (null group)"));
                        continue;
                    }
                };
                if raw < 0.0 {
                    return Err(GeomError::NegativeStackValue(raw));
                }
                let gi = match groups.iter().position(|x| *x == g) {
                    Some(gi) => gi,
                    None => {
                        groups.push(g);
                        groups.len() - 1
                    }
                };
                let key = (u.to_bits(), gi);
                match sums.iter_mut().find(|(k, _)| *k == key) {
                    Some((_, total)) => *total += raw,
                    None => sums.push((key, raw)),
                }
            }
            // emit per category in group order, accumulating the base
            let mut categories: Vec<u64> = Vec::new();
            for ((cat, _), _) in &sums {
                if !categories.contains(cat) {
                    categories.push(*cat);
                }
            }
            for cat in categories {
                let u = f64::from_bits(cat);
                let mut running = 0.0;
                for gi in 0..groups.len() {
                    let Some((_, value)) = sums.iter().find(|((c, g), _)| *c == cat && *g == gi)
                    else {
                        continue;
                    };
                    let v0 = input.scale_of(Channel::Y, running)?;
                    running += value;
                    let v1 = input.scale_of(Channel::Y, running)?;
                    let fill = palette_color(gi).to_string();
                    out.push(rect_between(input.coords, u - half, v0, u + half, v1, Style::filled(fill)));
                }
            }
        }
    }
    Ok(out)
}

/// The raw (pre-scale) numeric value feeding a scaled channel.
fn raw_number(input: &GeomInput, ch: Channel, row: &[DataValue]) -> Result<Option<f64>, GeomError> {
    match input.binding(ch)? {
        ResolvedBinding::Scaled { field, .. } | ResolvedBinding::Raw { field } => {
            Ok(row[*field].as_number())
        }
        ResolvedBinding::ConstNumber(n) => Ok(Some(*n)),
        ResolvedBinding::ScaledConst { value, .. } => Ok(value.as_number()),
        ResolvedBinding::ConstText(_) => Err(GeomError::BadBinding {
            channel: ch,
            reason: "expected a numeric binding".into(),
        }),
    }
}

/// Histogram over the raw values of the `value`/`field` binding. The bin
/// count defaults to Sturges (ceil(log2 n) + 1); positions use internal
/// linear scales spanning the inner frame.
pub fn geom_histogram(
    input: &GeomInput,
    bins: Option<usize>,
    warnings: &mut Vec<String>,
) -> Result<Vec<RenderCommand>, GeomError> {
    let values: Vec<f64> = input
        .table
        .rows()
        .iter()
        .filter_map(|row| raw_number(input, Channel::Value, row).transpose())
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        warnings.push("histogram: no non-null values, nothing emitted".to_string());
        return Ok(Vec::new());
    }
    let (edges, counts) = histogram_bins(&values, bins);
    let max_count = counts.iter().copied().max().unwrap_or(1).max(1) as f64;
    let (uext, vext) = range_extents(input.coords);
    let lo = edges[0];
    let hi = edges[edges.len() - 1];
    let span = if hi > lo { hi - lo } else { 1.0 };
    let fill = input.const_color(Channel::Fill, palette_color(0));
    let mut out = Vec::new();
    for (i, &count) in counts.iter().enumerate() {
        let u0 = (edges[i] - lo) / span * uext;
        let u1 = (edges[i + 1] - lo) / span * uext;
        let v1 = count as f64 / max_count * vext;
        out.push(rect_between(input.coords, u0, 0.0, u1, v1, Style::filled(fill.clone())));
    }
    Ok(out)
}

/// Equal-width bin edges and per-bin counts. The default bin count is
/// Sturges: ceil(log2 n) + 1. The last bin is closed on both sides; a
/// degenerate extent widens by ±0.5 so single-valued data still bins.
pub fn histogram_bins(values: &[f64], bins: Option<usize>) -> (Vec<f64>, Vec<usize>) {
    let n = values.len();
    let k = bins
        .unwrap_or_else(|| (n as f64).log2().ceil() as usize + 1)
        .max(1);
    let mut lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / k as f64;
    let edges: Vec<f64> = (0..=k).map(|i| lo + i as f64 * width).collect();
    let mut counts = vec![0usize; k];
    for &v in values {
        let mut b = ((v - lo) / width).floor() as usize;
        if b >= k {
            b = k - 1; // the maximum lands in the last bin
        }
        counts[b] += 1;
    }
    (edges, counts)
}

/// An axis-aligned rect between two range-space corners, placed through the
/// coordinate system (so flip and equal keep it a rect).
fn rect_between(
    coords: &CoordSystem,
    u0: f64,
    v0: f64,
    u1: f64,
    v1: f64,
    style: Style,
) -> RenderCommand {
    let (x0, y0) = coords.place(u0, v0);
    let (x1, y1) = coords.place(u1, v1);
    RenderCommand::Rect {
        x: x0.min(x1),
        y: y0.min(y1),
        w: (x1 - x0).abs(),
        h: (y1 - y0).abs(),
        style,
    }
}

/// Range-space extents of the coordinate system's u and v dimensions.
fn range_extents(coords: &CoordSystem) -> (f64, f64) {
    match coords {
        CoordSystem::Cartesian { frame } | CoordSystem::Equal { frame, .. } => {
            (frame.inner_width(), frame.inner_height())
        }
        CoordSystem::Flip { frame } => (frame.inner_height(), frame.inner_width()),
        CoordSystem::Polar { .. } => (1.0, 1.0),
        CoordSystem::Parallel { frame, .. } | CoordSystem::PolarParallel { frame, .. } => {
            (frame.inner_width(), frame.inner_height())
        }
    }
}

/// Pie/donut/cox-comb slices. Angular shares are proportional to the value
/// channel unless `outerRadius` is scale-bound (cox-comb), which switches
/// to equal slices with value-driven radius. Radii are fractions of the
/// frame's polar radius. Slices start at 12 o'clock and run clockwise in
/// row order.
pub fn geom_arc(
    input: &GeomInput,
    warnings: &mut Vec<String>,
) -> Result<Vec<RenderCommand>, GeomError> {
    let frame = input.coords.frame();
    let (cx, cy) = frame.center();
    let big_r = frame.radius();

    let mut rows_used: Vec<(usize, f64)> = Vec::new();
    for (i, row) in input.table.rows().iter().enumerate() {
        match raw_number(input, Channel::Value, row)? {
            Some(v) if v < 0.0 => return Err(GeomError::NegativeValue(v)),
            Some(v) => rows_used.push((i, v)),
            None => warnings.push(format!("arc: row {i} skipped (null value)")),
        }
    }
    let total: f64 = rows_used.iter().map(|(_, v)| v).sum();
    if total == 0.0 {
        return Err(GeomError::ZeroTotal);
    }

    let explicit_angles = input.bindings.contains_key(&Channel::StartAngle)
        && input.bindings.contains_key(&Channel::EndAngle);
    let coxcomb = matches!(
        input.bindings.get(&Channel::OuterRadius),
        Some(ResolvedBinding::Scaled { .. })
    );

    let mut out = Vec::new();
    let mut cursor = 0.0f64; // cumulative turn fraction
    for (slice, &(i, v)) in rows_used.iter().enumerate() {
        let row = &input.table.rows()[i];
        let (f0, f1) = if explicit_angles {
            let a = input.num(Channel::StartAngle, row)?.unwrap_or(0.0);
            let b = input.num(Channel::EndAngle, row)?.unwrap_or(a);
            (a, b.max(a))
        } else if coxcomb {
            let f0 = slice as f64 / rows_used.len() as f64;
            (f0, (slice + 1) as f64 / rows_used.len() as f64)
        } else {
            let f0 = cursor;
            cursor += v / total;
            (f0, cursor)
        };
        let r0 = input.num_or(Channel::InnerRadius, row, 0.0)?.max(0.0);
        let r1 = input.num_or(Channel::OuterRadius, row, 1.0)?.max(0.0);
        if (r1 - r0).abs() < f64::EPSILON {
            warnings.push(format!("arc: row {i} has zero radial width"));
        }
        let fill = input.color_or(Channel::Fill, row, palette_color(slice))?;
        out.push(RenderCommand::ArcPath {
            cx,
            cy,
            r0: big_r * r0.min(r1),
            r1: big_r * r0.max(r1),
            a0: -PI / 2.0 + 2.0 * PI * f0,
            a1: -PI / 2.0 + 2.0 * PI * f1,
            style: Style::filled(fill),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleOrientation {
    Horizontal,
    Vertical,
}

/// Full-width (or full-height) reference lines at each scaled position.
pub fn geom_rule(
    input: &GeomInput,
    orientation: RuleOrientation,
    warnings: &mut Vec<String>,
) -> Result<Vec<RenderCommand>, GeomError> {
    let (uext, vext) = range_extents(input.coords);
    let ch = match orientation {
        RuleOrientation::Horizontal => Channel::Y,
        RuleOrientation::Vertical => Channel::X,
    };
    let binding = input.binding(ch)?;
    let stroke = input.const_color(Channel::Stroke, "#000000");
    let mut positions = Vec::new();
    if binding.per_row() {
        for (i, row) in input.table.rows().iter().enumerate() {
            match input.num(ch, row)? {
                Some(v) => positions.push(v),
                None => warnings.push(format!("rule: row {i} skipped (null position)")),
            }
        }
    } else {
        match binding.eval(&[])? {
            Some(ScaledValue::Number(v)) => positions.push(v),
            _ => {
                return Err(GeomError::BadBinding {
                    channel: ch,
                    reason: "rule position must be numeric".into(),
                })
            }
        }
    }
    Ok(positions
        .into_iter()
        .map(|p| {
            let (a, b) = match orientation {
                RuleOrientation::Horizontal => {
                    (input.coords.place(0.0, p), input.coords.place(uext, p))
                }
                RuleOrientation::Vertical => {
                    (input.coords.place(p, 0.0), input.coords.place(p, vext))
                }
            };
            RenderCommand::Path {
                points: vec![a, b],
                closed: false,
                style: Style::stroked(stroke.clone(), 1.0),
            }
        })
        .collect())
}

/// One text command per row at the scaled position, content from the label
/// binding; numbers are formatted by the shared tick formatter.
pub fn geom_text(
    input: &GeomInput,
    warnings: &mut Vec<String>,
) -> Result<Vec<RenderCommand>, GeomError> {
    let font = match input.bindings.get(&Channel::Font) {
        Some(ResolvedBinding::ConstText(f)) => f.clone(),
        _ => DEFAULT_FONT.to_string(),
    };
    let mut out = Vec::new();
    for (i, row) in input.table.rows().iter().enumerate() {
        let (u, v) = match (input.num(Channel::X, row)?, input.num(Channel::Y, row)?) {
            (Some(u), Some(v)) => (u, v),
            _ => {
                warnings.push(format!("text: row {i} skipped (null position)"));
                continue;
            }
        };
        let content = match input.binding(Channel::Label)?.eval(row)? {
            Some(ScaledValue::Text(s)) => s,
            Some(ScaledValue::Number(n)) => format_number(n),
            None => {
                warnings.push(format!("text: row {i} skipped (null label)"));
                continue;
            }
        };
        let (x, y) = input.coords.place(u, v);
        let fill = input.color_or(Channel::Fill, row, "#000000")?;
        out.push(RenderCommand::Text {
            x,
            y,
            content,
            font: font.clone(),
            anchor: TextAnchor::Middle,
            style: Style::filled(fill),
        });
    }
    Ok(out)
}

/// One 3×3 greyscale glyph per row of a nest-output table (columns `x`,
/// `y`, `g0`..`g8`), centered on the scaled position.
pub fn geom_picture(
    input: &GeomInput,
    warnings: &mut Vec<String>,
) -> Result<Vec<RenderCommand>, GeomError> {
    let level_cols: Vec<usize> = (0..9)
        .map(|i| {
            input
                .table
                .column_index(&format!("g{i}"))
                .ok_or_else(|| GeomError::BadBinding {
                    channel: Channel::Value,
                    reason: format!("picture needs nest output columns g0..g8, missing g{i}"),
                })
        })
        .collect::<Result<_, _>>()?;
    let size = match input.bindings.get(&Channel::Size) {
        Some(ResolvedBinding::ConstNumber(s)) => *s,
        _ => DEFAULT_GLYPH_SIZE,
    };
    let mut out = Vec::new();
    for (i, row) in input.table.rows().iter().enumerate() {
        let (u, v) = match (input.num(Channel::X, row)?, input.num(Channel::Y, row)?) {
            (Some(u), Some(v)) => (u, v),
            _ => {
                warnings.push(format!("picture: row {i} skipped (null position)"));
                continue;
            }
        };
        let (cx, cy) = input.coords.place(u, v);
        let mut levels = [0.5f64; 9];
        for (b, &col) in level_cols.iter().enumerate() {
            levels[b] = row[col].as_number().unwrap_or(0.5).clamp(0.0, 1.0);
        }
        out.push(RenderCommand::Image {
            x: cx - size / 2.0,
            y: cy - size / 2.0,
            w: size,
            h: size,
            levels,
        });
    }
    Ok(out)
}

/// The symbol registry for the marks geometry, in fixed order.
pub const SHAPES: [&str; 5] = ["circle", "square", "triangle", "cross", "diamond"];

/// Like points, but the shape channel picks a symbol per row and the size
/// channel controls the bounding box (default 6 px).
pub fn geom_marks(
    input: &GeomInput,
    warnings: &mut Vec<String>,
) -> Result<Vec<RenderCommand>, GeomError> {
    let mut out = Vec::new();
    for (i, row) in input.table.rows().iter().enumerate() {
        let (u, v) = match (input.num(Channel::X, row)?, input.num(Channel::Y, row)?) {
            (Some(u), Some(v)) => (u, v),
            _ => {
                warnings.push(format!("marks: row {i} skipped (null position)"));
                continue;
            }
        };
        let shape = match input.bindings.get(&Channel::Shape) {
            None => "circle".to_string(),
            Some(b) => match b.eval(row)? {
                Some(ScaledValue::Text(s)) => s,
                Some(ScaledValue::Number(n)) => {
                    return Err(GeomError::BadBinding {
                        channel: Channel::Shape,
                        reason: format!("shape scale produced number {n}"),
                    })
                }
                None => "circle".to_string(),
            },
        };
        let size = input.num_or(Channel::Size, row, DEFAULT_MARK_SIZE)?;
        let fill = input.color_or(Channel::Fill, row, palette_color(0))?;
        let (cx, cy) = input.coords.place(u, v);
        out.push(symbol_command(&shape, cx, cy, size, Style::filled(fill))?);
    }
    Ok(out)
}

/// A symbol inscribed in a `size`-wide bounding box centered on (cx, cy).
pub fn symbol_command(
    shape: &str,
    cx: f64,
    cy: f64,
    size: f64,
    style: Style,
) -> Result<RenderCommand, GeomError> {
    let h = size / 2.0;
    let path = |points: Vec<(f64, f64)>| RenderCommand::Path {
        points,
        closed: true,
        style: style.clone(),
    };
    Ok(match shape {
        "circle" => RenderCommand::Circle { cx, cy, r: h, style },
        "square" => path(vec![
            (cx - h, cy - h),
            (cx + h, cy - h),
            (cx + h, cy + h),
            (cx - h, cy + h),
        ]),
        "triangle" => path(vec![(cx, cy - h), (cx + h, cy + h), (cx - h, cy + h)]),
        "diamond" => path(vec![(cx, cy - h), (cx + h, cy), (cx, cy + h), (cx - h, cy)]),
        "cross" => {
            let t = h / 3.0;
            path(vec![
                (cx - t, cy - h),
                (cx + t, cy - h),
                (cx + t, cy - t),
                (cx + h, cy - t),
                (cx + h, cy + t),
                (cx + t, cy + t),
                (cx + t, cy + h),
                (cx - t, cy + h),
                (cx - t, cy + t),
                (cx - h, cy + t),
                (cx - h, cy - t),
                (cx - t, cy - t),
            ])
        }
        other => return Err(GeomError::UnknownShape(other.to_string())),
    })
}

/// Dispatches a geometry kind to its implementation.
pub fn render_geom(
    kind: GeomKind,
    input: &GeomInput,
    bins: Option<usize>,
    warnings: &mut Vec<String>,
) -> Result<Vec<RenderCommand>, GeomError> {
    match kind {
        GeomKind::Point => geom_point(input, warnings),
        GeomKind::Line => geom_line(input, warnings),
        GeomKind::Area => geom_area(input, warnings),
        GeomKind::Bar | GeomKind::VerticalBar => geom_bar(input, BarVariant::Plain, warnings),
        GeomKind::StackedBar => geom_bar(input, BarVariant::Stacked, warnings),
        GeomKind::Histogram => geom_histogram(input, bins, warnings),
        GeomKind::Pie | GeomKind::Arc => geom_arc(input, warnings),
        GeomKind::HLine => geom_rule(input, RuleOrientation::Horizontal, warnings),
        GeomKind::VLine => geom_rule(input, RuleOrientation::Vertical, warnings),
        GeomKind::Text => geom_text(input, warnings),
        GeomKind::Picture => geom_picture(input, warnings),
        GeomKind::Marks => geom_marks(input, warnings),
    }
}
