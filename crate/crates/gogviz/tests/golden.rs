//! Byte-exact golden-file comparison for the gallery specs.
//!
//! Regenerate after an intentional rendering change with:
//! `UPDATE_GOLDEN=1 cargo test -p gogviz --test golden`

mod common;

use common::{compile_file, errors_of, gallery_dir, golden_dir};
use gogviz::svg::emit_svg;

const GALLERY: [&str; 11] = [
    "scatter",
    "bar",
    "stacked_bar",
    "histogram",
    "line",
    "area",
    "pie",
    "donut",
    "parallel",
    "polar_parallel",
    "nesting",
];

#[test]
fn gallery_specs_match_committed_svg_bytes() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let mut mismatches = Vec::new();
    for name in GALLERY {
        let out = compile_file(&gallery_dir().join(format!("{name}.json")));
        assert!(!out.has_errors(), "{name}: {:?}", errors_of(&out));
        let bytes = emit_svg(&out.scene.unwrap()).unwrap();
        let golden_path = golden_dir().join(format!("{name}.svg"));
        if update {
            std::fs::write(&golden_path, &bytes).unwrap();
            continue;
        }
        let golden = std::fs::read(&golden_path)
            .unwrap_or_else(|e| panic!("{name}: missing golden ({e}); run with UPDATE_GOLDEN=1"));
        if bytes != golden {
            mismatches.push(name);
        }
    }
    assert!(mismatches.is_empty(), "golden mismatch: {mismatches:?}");
}

/// The emitted documents stay inside the SVG 1.1 subset this backend
/// commits to: well-formed XML, allowlisted elements and attributes only.
#[test]
fn gallery_svg_is_well_formed_and_allowlisted() {
    const ELEMENTS: [&str; 6] = ["svg", "circle", "rect", "path", "text", "g"];
    const ATTRIBUTES: [&str; 16] = [
        "xmlns", "width", "height", "viewBox", "cx", "cy", "r", "x", "y", "d", "fill", "stroke",
        "stroke-width", "opacity", "text-anchor", "style",
    ];
    for name in GALLERY {
        let out = compile_file(&gallery_dir().join(format!("{name}.json")));
        let svg = String::from_utf8(emit_svg(&out.scene.unwrap()).unwrap()).unwrap();
        let mut stack: Vec<String> = Vec::new();
        let body = svg.strip_prefix("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n").unwrap();
        let mut rest = body;
        while let Some(start) = rest.find('<') {
            rest = &rest[start + 1..];
            let end = rest.find('>').expect("unterminated tag");
            let tag = &rest[..end];
            rest = &rest[end + 1..];
            if let Some(closing) = tag.strip_prefix('/') {
                assert_eq!(stack.pop().as_deref(), Some(closing), "{name}: tag mismatch");
                continue;
            }
            let self_closing = tag.ends_with('/');
            let tag = tag.trim_end_matches('/');
            let mut parts = tag.splitn(2, ' ');
            let element = parts.next().unwrap();
            assert!(ELEMENTS.contains(&element), "{name}: element {element:?}");
            if let Some(attrs) = parts.next() {
                let mut scan = attrs;
                while let Some(eq) = scan.find('=') {
                    let key = scan[..eq].trim();
                    assert!(ATTRIBUTES.contains(&key), "{name}: attribute {key:?}");
                    let after = &scan[eq + 2..]; // skip ="
                    let close = after.find('"').expect("unterminated attribute");
                    scan = after[close + 1..].trim_start();
                }
            }
            if !self_closing {
                stack.push(element.to_string());
            }
        }
        assert!(stack.is_empty(), "{name}: unclosed tags {stack:?}");
    }
}

/// Element count equals command count, with the 3×3 image group counting
/// as one element.
#[test]
fn element_count_matches_command_count() {
    for name in GALLERY {
        let out = compile_file(&gallery_dir().join(format!("{name}.json")));
        let scene = out.scene.unwrap();
        let svg = String::from_utf8(emit_svg(&scene).unwrap()).unwrap();
        let circles = svg.lines().filter(|l| l.starts_with("<circle")).count();
        let paths = svg.lines().filter(|l| l.starts_with("<path")).count();
        let texts = svg.lines().filter(|l| l.starts_with("<text")).count();
        let groups = svg.lines().filter(|l| *l == "<g>").count();
        let rects = svg.lines().filter(|l| l.starts_with("<rect")).count();
        // each image group holds exactly nine inner rects
        let elements = circles + paths + texts + groups + rects - groups * 9;
        assert_eq!(elements, scene.commands.len(), "{name}");
    }
}
