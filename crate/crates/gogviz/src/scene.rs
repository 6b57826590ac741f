//! Device-independent render commands: the output of the geometry and guide
//! layers and the input of the SVG backend.

use crate::coords::PlotFrame;

/// Paint properties shared by all commands.
#[derive(Debug, Clone, PartialEq)]
pub struct Style {
    /// `#rrggbb` fill, or `None` for no fill.
    pub fill: Option<String>,
    /// `#rrggbb` stroke, or `None` for no stroke.
    pub stroke: Option<String>,
    pub stroke_width: f64,
    pub opacity: f64,
}

impl Style {
    pub fn filled(color: impl Into<String>) -> Style {
        Style {
            fill: Some(color.into()),
            stroke: None,
            stroke_width: 1.0,
            opacity: 1.0,
        }
    }

    pub fn stroked(color: impl Into<String>, width: f64) -> Style {
        Style {
            fill: None,
            stroke: Some(color.into()),
            stroke_width: width,
            opacity: 1.0,
        }
    }
}

/// Horizontal anchoring of a text command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextAnchor {
    Start,
    Middle,
    End,
}

/// One drawable primitive, already in canvas coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum RenderCommand {
    Circle {
        cx: f64,
        cy: f64,
        r: f64,
        style: Style,
    },
    Rect {
        x: f64,
        y: f64,
        w: f64,
        h: f64,
        style: Style,
    },
    /// Polyline through `points`; `closed` appends a Z segment.
    Path {
        points: Vec<(f64, f64)>,
        closed: bool,
        style: Style,
    },
    Text {
        x: f64,
        y: f64,
        content: String,
        /// CSS shorthand, emitted verbatim (e.g. `10px sans-serif`).
        font: String,
        anchor: TextAnchor,
        style: Style,
    },
    /// 3×3 greyscale glyph; `x`, `y` is the top-left corner and `levels`
    /// are row-major grey levels in [0, 1] (1 renders black).
    Image {
        x: f64,
        y: f64,
        w: f64,
        h: f64,
        levels: [f64; 9],
    },
    /// Annulus sector between radii `r0 ≤ r1` spanning device-space angles
    /// `a0 ≤ a1 ≤ a0 + 2π` (radians measured from the +x direction).
    ArcPath {
        cx: f64,
        cy: f64,
        r0: f64,
        r1: f64,
        a0: f64,
        a1: f64,
        style: Style,
    },
}

impl RenderCommand {
    /// All coordinates finite and arc angles ordered; checked by the SVG
    /// backend before serialization.
    pub fn is_valid(&self) -> bool {
        let finite = |vals: &[f64]| vals.iter().all(|v| v.is_finite());
        match self {
            RenderCommand::Circle { cx, cy, r, .. } => finite(&[*cx, *cy, *r]),
            RenderCommand::Rect { x, y, w, h, .. } => finite(&[*x, *y, *w, *h]),
            RenderCommand::Path { points, .. } => {
                points.iter().all(|(x, y)| x.is_finite() && y.is_finite())
            }
            RenderCommand::Text { x, y, .. } => finite(&[*x, *y]),
            RenderCommand::Image { x, y, w, h, levels } => {
                finite(&[*x, *y, *w, *h]) && levels.iter().all(|l| l.is_finite())
            }
            RenderCommand::ArcPath { cx, cy, r0, r1, a0, a1, .. } => {
                finite(&[*cx, *cy, *r0, *r1, *a0, *a1])
                    && r0 <= r1
                    && a0 <= a1
                    && *a1 <= a0 + 2.0 * std::f64::consts::PI + 1e-9
            }
        }
    }
}

/// The ordered, device-independent draw list a compilation produces.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneGraph {
    pub frame: PlotFrame,
    pub commands: Vec<RenderCommand>,
    /// Layer execution order, for the debug surface. Labels like
    /// `data:crimea`, `scale:xscale`, `geom:0`.
    pub execution_order: Vec<String>,
    /// Per-record normalized axis fractions, present when the spec uses a
    /// parallel coordinate system. Row-major: one vector per record.
    pub record_fractions: Option<Vec<Vec<f64>>>,
}

impl SceneGraph {
    pub fn new(frame: PlotFrame) -> SceneGraph {
        SceneGraph {
            frame,
            commands: Vec::new(),
            execution_order: Vec::new(),
            record_fractions: None,
        }
    }
}

/// The fixed categorical palette applied when no color binding is given.
pub const PALETTE: [&str; 10] = [
    "#4c78a8", "#f58518", "#e45756", "#72b7b2", "#54a24b", "#eeca3b", "#b279a2", "#ff9da6",
    "#9d755d", "#bab0ac",
];

pub fn palette_color(index: usize) -> &'static str {
    PALETTE[index % PALETTE.len()]
}
