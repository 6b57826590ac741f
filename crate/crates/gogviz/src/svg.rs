//! Deterministic SVG 1.1 serialization of a scene graph.
//!
//! The backend is a dumb serializer: all geometry (including the y flip)
//! happened upstream in the coordinate layer. Every number is printed with
//! exactly two decimals (half-up via `round`), attributes are emitted in a
//! fixed order, and there are no timestamps or generated ids, so serializing
//! the same scene twice yields identical bytes.
//!
//! Attribute order: geometry attributes first (`cx cy r` / `x y width
//! height` / `d` / `x y text-anchor style`), then paint attributes in the
//! order `fill`, `stroke`, `stroke-width`, `opacity`. `stroke-width` is
//! emitted only with a stroke, `opacity` only when it differs from 1.

use crate::scene::{RenderCommand, SceneGraph, Style, TextAnchor};
use std::f64::consts::PI;
use std::fmt::Write;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SvgError {
    #[error("invalid render command: {0}")]
    InvalidCommand(String),
}

/// Two-decimal fixed formatting, rounding halves away from zero; negative
/// zero normalizes to "0.00".
pub fn fmt2(v: f64) -> String {
    let scaled = (v * 100.0).round();
    let scaled = if scaled == 0.0 { 0.0 } else { scaled };
    format!("{:.2}", scaled / 100.0)
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

fn style_attrs(style: &Style) -> String {
    let mut s = String::new();
    match &style.fill {
        Some(c) => write!(s, " fill=\"{}\"", xml_escape(c)).unwrap(),
        None => s.push_str(" fill=\"none\""),
    }
    if let Some(c) = &style.stroke {
        write!(s, " stroke=\"{}\"", xml_escape(c)).unwrap();
        write!(s, " stroke-width=\"{}\"", fmt2(style.stroke_width)).unwrap();
    }
    if style.opacity != 1.0 {
        write!(s, " opacity=\"{}\"", fmt2(style.opacity)).unwrap();
    }
    s
}

fn path_data(points: &[(f64, f64)], closed: bool) -> String {
    let mut d = String::new();
    for (i, (x, y)) in points.iter().enumerate() {
        let cmd = if i == 0 { 'M' } else { 'L' };
        write!(d, "{}{} {}", cmd, fmt2(*x), fmt2(*y)).unwrap();
        if i + 1 < points.len() {
            d.push(' ');
        }
    }
    if closed {
        d.push('Z');
    }
    d
}

/// Annulus-sector path data. Sweeps of a full turn are split into two half
/// arcs, since a single SVG arc of 2π collapses to nothing.
fn arc_data(cx: f64, cy: f64, r0: f64, r1: f64, a0: f64, a1: f64) -> String {
    let pt = |r: f64, a: f64| (cx + r * a.cos(), cy + r * a.sin());
    let sweep = a1 - a0;
    let full = sweep >= 2.0 * PI - 1e-9;
    let mid = a0 + sweep / 2.0;
    let mut d = String::new();
    let (sx, sy) = pt(r1, a0);
    write!(d, "M{} {}", fmt2(sx), fmt2(sy)).unwrap();
    let arc_to = |d: &mut String, r: f64, to: (f64, f64), large: bool, sweep_flag: u8| {
        write!(
            d,
            " A{} {} 0 {} {} {} {}",
            fmt2(r),
            fmt2(r),
            large as u8,
            sweep_flag,
            fmt2(to.0),
            fmt2(to.1)
        )
        .unwrap();
    };
    // outer arc, clockwise in device space (sweep flag 1)
    if full {
        arc_to(&mut d, r1, pt(r1, mid), false, 1);
        arc_to(&mut d, r1, pt(r1, a1), false, 1);
    } else {
        arc_to(&mut d, r1, pt(r1, a1), sweep > PI, 1);
    }
    if r0 > 0.0 {
        let (ix, iy) = pt(r0, a1);
        write!(d, " L{} {}", fmt2(ix), fmt2(iy)).unwrap();
        if full {
            arc_to(&mut d, r0, pt(r0, mid), false, 0);
            arc_to(&mut d, r0, pt(r0, a0), false, 0);
        } else {
            arc_to(&mut d, r0, pt(r0, a0), sweep > PI, 0);
        }
    } else {
        write!(d, " L{} {}", fmt2(cx), fmt2(cy)).unwrap();
    }
    d.push('Z');
    d
}

/// Grey level in [0, 1] (1 = black) to `#rrggbb`, rounding half up.
pub fn grey_color(level: f64) -> String {
    let v = (255.0 * (1.0 - level.clamp(0.0, 1.0))).round() as u8;
    format!("#{v:02x}{v:02x}{v:02x}")
}

fn write_command(out: &mut String, cmd: &RenderCommand) -> Result<(), SvgError> {
    if !cmd.is_valid() {
        return Err(SvgError::InvalidCommand(format!("{cmd:?}")));
    }
    match cmd {
        RenderCommand::Circle { cx, cy, r, style } => {
            writeln!(
                out,
                "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"{}/>",
                fmt2(*cx),
                fmt2(*cy),
                fmt2(*r),
                style_attrs(style)
            )
            .unwrap();
        }
        RenderCommand::Rect { x, y, w, h, style } => {
            writeln!(
                out,
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"{}/>",
                fmt2(*x),
                fmt2(*y),
                fmt2(*w),
                fmt2(*h),
                style_attrs(style)
            )
            .unwrap();
        }
        RenderCommand::Path { points, closed, style } => {
            writeln!(out, "<path d=\"{}\"{}/>", path_data(points, *closed), style_attrs(style))
                .unwrap();
        }
        RenderCommand::Text { x, y, content, font, anchor, style } => {
            let anchor = match anchor {
                TextAnchor::Start => "start",
                TextAnchor::Middle => "middle",
                TextAnchor::End => "end",
            };
            writeln!(
                out,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"{}\" style=\"font:{}\"{}>{}</text>",
                fmt2(*x),
                fmt2(*y),
                anchor,
                xml_escape(font),
                style_attrs(style),
                xml_escape(content)
            )
            .unwrap();
        }
        RenderCommand::Image { x, y, w, h, levels } => {
            // nine blocks grouped; counted as one scene element
            writeln!(out, "<g>").unwrap();
            let bw = w / 3.0;
            let bh = h / 3.0;
            for (i, level) in levels.iter().enumerate() {
                let bx = x + (i % 3) as f64 * bw;
                let by = y + (i / 3) as f64 * bh;
                writeln!(
                    out,
                    "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>",
                    fmt2(bx),
                    fmt2(by),
                    fmt2(bw),
                    fmt2(bh),
                    grey_color(*level)
                )
                .unwrap();
            }
            writeln!(out, "</g>").unwrap();
        }
        RenderCommand::ArcPath { cx, cy, r0, r1, a0, a1, style } => {
            writeln!(
                out,
                "<path d=\"{}\"{}/>",
                arc_data(*cx, *cy, *r0, *r1, *a0, *a1),
                style_attrs(style)
            )
            .unwrap();
        }
    }
    Ok(())
}

/// Serializes a scene into a standalone SVG 1.1 document (UTF-8 bytes).
pub fn emit_svg(scene: &SceneGraph) -> Result<Vec<u8>, SvgError> {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        fmt2(scene.frame.width),
        fmt2(scene.frame.height),
        fmt2(scene.frame.width),
        fmt2(scene.frame.height)
    )
    .unwrap();
    for cmd in &scene.commands {
        write_command(&mut out, cmd)?;
    }
    out.push_str("</svg>\n");
    Ok(out.into_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coords::PlotFrame;

    fn empty_scene() -> SceneGraph {
        SceneGraph::new(PlotFrame::new(600.0, 400.0, 40.0))
    }

    #[test]
    fn empty_scene_is_a_bare_root() {
        let svg = String::from_utf8(emit_svg(&empty_scene()).unwrap()).unwrap();
        assert!(svg.starts_with("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg "));
        assert!(svg.contains("viewBox=\"0 0 600.00 400.00\""));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches('<').count(), 3); // xml decl, svg open, svg close
    }

    #[test]
    fn circle_formatting_contract() {
        let mut scene = empty_scene();
        scene.commands.push(RenderCommand::Circle {
            cx: 40.0,
            cy: 360.0,
            r: 3.0,
            style: Style::filled("#4c78a8"),
        });
        let svg = String::from_utf8(emit_svg(&scene).unwrap()).unwrap();
        assert!(svg.contains("<circle cx=\"40.00\" cy=\"360.00\" r=\"3.00\" fill=\"#4c78a8\"/>"));
    }

    #[test]
    fn serialization_is_deterministic() {
        let mut scene = empty_scene();
        scene.commands.push(RenderCommand::Path {
            points: vec![(1.0, 2.0), (3.0, 4.5)],
            closed: false,
            style: Style::stroked("#000000", 1.0),
        });
        assert_eq!(emit_svg(&scene).unwrap(), emit_svg(&scene).unwrap());
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(fmt2(0.005), "0.01");
        assert_eq!(fmt2(-0.005), "-0.01");
        assert_eq!(fmt2(1.0), "1.00");
        assert_eq!(fmt2(-0.0001), "0.00");
    }

    #[test]
    fn grey_endpoints() {
        assert_eq!(grey_color(0.0), "#ffffff");
        assert_eq!(grey_color(1.0), "#000000");
        assert_eq!(grey_color(0.5), "#808080");
    }

    #[test]
    fn image_expands_to_group_of_nine() {
        let mut scene = empty_scene();
        scene.commands.push(RenderCommand::Image {
            x: 0.0,
            y: 0.0,
            w: 12.0,
            h: 12.0,
            levels: [0.0; 9],
        });
        let svg = String::from_utf8(emit_svg(&scene).unwrap()).unwrap();
        assert_eq!(svg.matches("<rect").count(), 9);
        assert_eq!(svg.matches("<g>").count(), 1);
    }

    #[test]
    fn non_finite_command_rejected() {
        let mut scene = empty_scene();
        scene.commands.push(RenderCommand::Circle {
            cx: f64::NAN,
            cy: 0.0,
            r: 1.0,
            style: Style::filled("#000000"),
        });
        assert!(matches!(emit_svg(&scene), Err(SvgError::InvalidCommand(_))));
    }

    #[test]
    fn text_content_escaped() {
        let mut scene = empty_scene();
        scene.commands.push(RenderCommand::Text {
            x: 0.0,
            y: 0.0,
            content: "a < b & c".into(),
            font: "10px sans-serif".into(),
            anchor: TextAnchor::Middle,
            style: Style::filled("#000000"),
        });
        let svg = String::from_utf8(emit_svg(&scene).unwrap()).unwrap();
        assert!(svg.contains(">a &lt; b &amp; c</text>"));
    }

    #[test]
    fn full_turn_arc_still_draws() {
        let mut scene = empty_scene();
        scene.commands.push(RenderCommand::ArcPath {
            cx: 100.0,
            cy: 100.0,
            r0: 0.0,
            r1: 50.0,
            a0: -PI / 2.0,
            a1: 3.0 * PI / 2.0,
            style: Style::filled("#4c78a8"),
        });
        let svg = String::from_utf8(emit_svg(&scene).unwrap()).unwrap();
        // two half arcs
        assert_eq!(svg.matches(" A").count(), 2);
    }
}
