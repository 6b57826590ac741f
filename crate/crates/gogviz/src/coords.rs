//! Coordinate systems: transforms from abstract range-space positions to
//! canvas points. Cartesian, equal-aspect, flipped, polar, parallel, and
//! polar parallel.
//!
//! Conventions fixed here: data y grows upward while device y grows
//! downward; polar angle zero sits at 12 o'clock and increases clockwise.

use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoordError {
    #[error("parallel coordinates need at least 2 axes, got {0}")]
    TooFewAxes(usize),
    #[error("record has {got} values but there are {axes} axes")]
    ArityMismatch { got: usize, axes: usize },
}

/// Canvas geometry: total size plus uniform padding per side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotFrame {
    pub width: f64,
    pub height: f64,
    pub padding: f64,
}

impl PlotFrame {
    pub fn new(width: f64, height: f64, padding: f64) -> PlotFrame {
        PlotFrame { width, height, padding }
    }

    pub fn origin(&self) -> (f64, f64) {
        (self.padding, self.padding)
    }

    pub fn inner_width(&self) -> f64 {
        self.width - 2.0 * self.padding
    }

    pub fn inner_height(&self) -> f64 {
        self.height - 2.0 * self.padding
    }

    pub fn center(&self) -> (f64, f64) {
        (self.width / 2.0, self.height / 2.0)
    }

    /// Radius available to polar layouts.
    pub fn radius(&self) -> f64 {
        self.inner_width().min(self.inner_height()) / 2.0
    }
}

/// Which coordinate system places scaled positions on the canvas.
#[derive(Debug, Clone, PartialEq)]
pub enum CoordSystem {
    Cartesian {
        frame: PlotFrame,
    },
    /// Roles of u and v swapped, ranges resolved against the swapped
    /// dimensions.
    Flip {
        frame: PlotFrame,
    },
    /// One unit of u equals one unit of v in pixels. Inputs are offsets
    /// from the domain minimum in transformed-data units.
    Equal {
        frame: PlotFrame,
        domain_w: f64,
        domain_h: f64,
    },
    /// Inputs are fractions: u is the angular turn, v the radial fraction.
    Polar {
        frame: PlotFrame,
        inset: f64,
    },
    Parallel {
        frame: PlotFrame,
        axes: usize,
    },
    PolarParallel {
        frame: PlotFrame,
        axes: usize,
        inset: f64,
    },
}

impl CoordSystem {
    pub fn frame(&self) -> &PlotFrame {
        match self {
            CoordSystem::Cartesian { frame }
            | CoordSystem::Flip { frame }
            | CoordSystem::Equal { frame, .. }
            | CoordSystem::Polar { frame, .. }
            | CoordSystem::Parallel { frame, .. }
            | CoordSystem::PolarParallel { frame, .. } => frame,
        }
    }

    /// Places a range-space position on the canvas.
    pub fn place(&self, u: f64, v: f64) -> (f64, f64) {
        match self {
            CoordSystem::Cartesian { frame } => to_canvas_cartesian(frame, u, v),
            CoordSystem::Flip { frame } => to_canvas_flip(frame, u, v),
            CoordSystem::Equal { frame, domain_w, domain_h } => {
                to_canvas_equal(frame, *domain_w, *domain_h, u, v)
            }
            CoordSystem::Polar { frame, inset } => to_canvas_polar(frame, *inset, u, v),
            // geometry placement is undefined under parallel kinds (the
            // linker rejects geoms there); fall back to cartesian
            CoordSystem::Parallel { frame, .. } | CoordSystem::PolarParallel { frame, .. } => {
                to_canvas_cartesian(frame, u, v)
            }
        }
    }
}

/// px = origin_x + u, py = origin_y + inner_height − v.
pub fn to_canvas_cartesian(frame: &PlotFrame, u: f64, v: f64) -> (f64, f64) {
    let (ox, oy) = frame.origin();
    (ox + u, oy + frame.inner_height() - v)
}

/// Swaps the roles of u and v, then applies the cartesian mapping.
pub fn to_canvas_flip(frame: &PlotFrame, u: f64, v: f64) -> (f64, f64) {
    to_canvas_cartesian(frame, v, u)
}

/// Both dimensions share the pixel scale
/// `s = min(inner_w/domain_w, inner_h/domain_h)`, centered in the frame.
/// u and v are offsets from the domain minimum in data units.
pub fn to_canvas_equal(
    frame: &PlotFrame,
    domain_w: f64,
    domain_h: f64,
    u: f64,
    v: f64,
) -> (f64, f64) {
    let s = (frame.inner_width() / domain_w).min(frame.inner_height() / domain_h);
    let x_off = (frame.inner_width() - s * domain_w) / 2.0;
    let y_off = (frame.inner_height() - s * domain_h) / 2.0;
    let (ox, oy) = frame.origin();
    (ox + x_off + s * u, oy + frame.inner_height() - (y_off + s * v))
}

/// Angle zero at 12 o'clock, clockwise positive; radius runs from
/// `R·inset` at v = 0 to `R` at v = 1.
pub fn to_canvas_polar(frame: &PlotFrame, inset: f64, theta_frac: f64, r_frac: f64) -> (f64, f64) {
    let (cx, cy) = frame.center();
    let r = frame.radius() * (inset + (1.0 - inset) * r_frac);
    let angle = -PI / 2.0 + 2.0 * PI * theta_frac;
    (cx + r * angle.cos(), cy + r * angle.sin())
}

/// The line of one axis of a parallel-coordinates layout, with a helper to
/// place a normalized fraction on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisGeom {
    /// Low end of the axis (fraction 0).
    pub start: (f64, f64),
    /// High end of the axis (fraction 1).
    pub end: (f64, f64),
}

impl AxisGeom {
    /// The point at fraction `t` from the low end.
    pub fn point_at(&self, t: f64) -> (f64, f64) {
        (
            self.start.0 + t * (self.end.0 - self.start.0),
            self.start.1 + t * (self.end.1 - self.start.1),
        )
    }

    /// Unit vector perpendicular to the axis (for tick marks).
    pub fn normal(&self) -> (f64, f64) {
        let dx = self.end.0 - self.start.0;
        let dy = self.end.1 - self.start.1;
        let len = (dx * dx + dy * dy).sqrt();
        if len == 0.0 {
            (0.0, 0.0)
        } else {
            (-dy / len, dx / len)
        }
    }
}

/// Axis lines for a parallel layout: n vertical lines spread across the
/// inner width, or n radial spokes at equal angles starting at 12 o'clock.
pub fn parallel_axis_positions(
    frame: &PlotFrame,
    n: usize,
    polar: bool,
    inset: f64,
) -> Result<Vec<AxisGeom>, CoordError> {
    if n < 2 {
        return Err(CoordError::TooFewAxes(n));
    }
    let (ox, oy) = frame.origin();
    if polar {
        let (cx, cy) = frame.center();
        let r = frame.radius();
        Ok((0..n)
            .map(|i| {
                let angle = -PI / 2.0 + 2.0 * PI * i as f64 / n as f64;
                let (dx, dy) = (angle.cos(), angle.sin());
                AxisGeom {
                    start: (cx + r * inset * dx, cy + r * inset * dy),
                    end: (cx + r * dx, cy + r * dy),
                }
            })
            .collect())
    } else {
        let step = frame.inner_width() / (n - 1) as f64;
        Ok((0..n)
            .map(|i| {
                let x = ox + i as f64 * step;
                AxisGeom {
                    // fraction 0 at the bottom, matching the y convention
                    start: (x, oy + frame.inner_height()),
                    end: (x, oy),
                }
            })
            .collect())
    }
}

/// Per-record polyline: point i sits on axis i at its normalized fraction.
/// Polar parallel closes the loop by appending the first point.
pub fn polyline_for_record(
    fractions: &[f64],
    axes: &[AxisGeom],
    closed: bool,
) -> Result<Vec<(f64, f64)>, CoordError> {
    if fractions.len() != axes.len() {
        return Err(CoordError::ArityMismatch {
            got: fractions.len(),
            axes: axes.len(),
        });
    }
    let mut points: Vec<(f64, f64)> = fractions
        .iter()
        .zip(axes)
        .map(|(&t, axis)| axis.point_at(t))
        .collect();
    if closed {
        if let Some(&first) = points.first() {
            points.push(first);
        }
    }
    Ok(points)
}
