//! End-to-end compiler pipeline tests: phase behavior, diagnostics, and the
//! reference parallel-coordinates example.

mod common;

use common::{compile_file, compile_str, errors_of, gallery_dir};
use gogviz::diag::{Phase, Severity};
use gogviz::svg::emit_svg;

#[test]
fn every_bundled_spec_compiles_without_errors() {
    for path in common::all_spec_files() {
        let out = compile_file(&path);
        assert!(
            !out.has_errors(),
            "{}: {:?}",
            path.display(),
            errors_of(&out)
        );
        let scene = out.scene.expect("scene for clean compile");
        assert!(
            !scene.commands.is_empty(),
            "{}: empty scene",
            path.display()
        );
    }
}

#[test]
fn empty_spec_reports_missing_data() {
    let out = compile_str("{}");
    assert!(out.has_errors());
    let err = out.diagnostics.iter().find(|d| d.is_error()).unwrap();
    assert_eq!(err.phase, Phase::Scan);
    assert!(err.message.contains("\"data\""));
}

#[test]
fn invalid_json_is_a_scan_diagnostic() {
    let out = compile_str("{not json");
    assert!(out.has_errors());
    assert!(out.diagnostics[0].message.contains("invalid JSON"));
}

#[test]
fn compilation_stops_after_first_failing_phase() {
    // scan error (bad scale type) plus a would-be link error (unknown
    // dataset): only the scan phase may report
    let out = compile_str(
        r#"{"data": [{"name": "d", "values": [{"a": 1}]}],
            "scales": [{"name": "s", "type": "linnear",
                        "range": {"type": "range", "value": [0, 1]},
                        "domain": {"data": "nope", "field": "a"}}]}"#,
    );
    assert!(out.has_errors());
    assert!(out.diagnostics.iter().all(|d| d.phase == Phase::Scan));
    assert!(out.scene.is_none());
}

#[test]
fn unknown_scale_reference_fails_at_link() {
    let out = compile_str(
        r#"{"data": [{"name": "d", "values": [{"a": 1}]}],
            "axes": [{"type": "y", "scale": "zscale"}]}"#,
    );
    assert!(out.has_errors());
    let err = out.diagnostics.iter().find(|d| d.is_error()).unwrap();
    assert_eq!(err.phase, Phase::Link);
    assert_eq!(err.path, "/axes/0/scale");
}

#[test]
fn missing_data_file_fails_at_assemble() {
    let out = compile_str(
        r#"{"data": [{"name": "d", "values": "does-not-exist.csv"}]}"#,
    );
    assert!(out.has_errors());
    let err = out.diagnostics.iter().find(|d| d.is_error()).unwrap();
    assert_eq!(err.phase, Phase::Assemble);
    assert_eq!(err.path, "/data/0/values");
}

#[test]
fn execution_order_runs_scales_before_axes() {
    let out = compile_file(&gallery_dir().join("scatter.json"));
    let order = out.scene.unwrap().execution_order;
    let pos = |label: &str| order.iter().position(|o| o == label).unwrap();
    assert!(pos("data:autos") < pos("scale:xs"));
    assert!(pos("scale:xs") < pos("axis:0"));
    assert!(pos("axis:1") < pos("geom:0"));
    assert!(pos("geom:0") < pos("guide:0"));
}

#[test]
fn declaration_order_breaks_ties() {
    let out = compile_str(
        r#"{"data": [{"name": "d", "values": [{"x": 1, "y": 2}, {"x": 2, "y": 1}]}],
            "scales": [
              {"name": "xs", "type": "linear", "range": {"type": "range", "value": "width"},
               "domain": {"data": "d", "field": "x"}},
              {"name": "ys", "type": "linear", "range": {"type": "range", "value": "height"},
               "domain": {"data": "d", "field": "y"}}],
            "geom": [
              {"type": "Point", "data": "d", "properties": {"x": "xs", "y": "ys"}},
              {"type": "Line", "data": "d", "properties": {"x": "xs", "y": "ys"}}]}"#,
    );
    assert!(!out.has_errors(), "{:?}", errors_of(&out));
    let scene = out.scene.unwrap();
    let order = &scene.execution_order;
    let pos = |label: &str| order.iter().position(|o| o == label).unwrap();
    assert!(pos("geom:0") < pos("geom:1"));
    // geom A's commands precede geom B's: the circle batch comes first
    let first_circle = scene
        .commands
        .iter()
        .position(|c| matches!(c, gogviz::RenderCommand::Circle { .. }))
        .unwrap();
    let line_path = scene
        .commands
        .iter()
        .rposition(|c| matches!(c, gogviz::RenderCommand::Path { .. }))
        .unwrap();
    assert!(first_circle < line_path);
}

#[test]
fn transform_output_feeds_scale() {
    let out = compile_str(
        r#"{"data": [{"name": "raw", "values": [{"v": 1}, {"v": 5}, {"v": 3}]}],
            "transform": [{"type": "filter", "data": "raw", "predicate": "v > 1", "name": "big"}],
            "scales": [{"name": "vs", "type": "linear",
                        "range": {"type": "range", "value": "height"},
                        "domain": {"data": "big", "field": "v"}}],
            "geom": [{"type": "HLine", "data": "big",
                      "properties": {"y": {"field": "v", "scale": "vs"}}}]}"#,
    );
    assert!(!out.has_errors(), "{:?}", errors_of(&out));
    let order = out.scene.unwrap().execution_order;
    let pos = |label: &str| order.iter().position(|o| o == label).unwrap();
    assert!(pos("transform:0") < pos("scale:vs"));
}

#[test]
fn compile_is_deterministic() {
    for path in common::all_spec_files() {
        let a = compile_file(&path);
        let b = compile_file(&path);
        assert_eq!(a.diagnostics, b.diagnostics, "{}", path.display());
        let (sa, sb) = (a.scene.unwrap(), b.scene.unwrap());
        assert_eq!(
            emit_svg(&sa).unwrap(),
            emit_svg(&sb).unwrap(),
            "{}",
            path.display()
        );
    }
}

#[test]
fn explicit_defaults_match_omitted_defaults() {
    let omitted = compile_str(
        r#"{"data": [{"name": "d", "values": [{"x": 1, "y": 2}, {"x": 3, "y": 1}]}],
            "scales": [
              {"name": "xs", "type": "linear", "range": {"type": "range", "value": "width"},
               "domain": {"data": "d", "field": "x"}},
              {"name": "ys", "type": "linear", "range": {"type": "range", "value": "height"},
               "domain": {"data": "d", "field": "y"}}],
            "axes": [{"type": "x", "scale": "xs"}],
            "geom": [{"type": "Point", "data": "d", "properties": {"x": "xs", "y": "ys"}}]}"#,
    );
    let explicit = compile_str(
        r##"{"width": 600, "height": 400, "padding": 40,
            "data": [{"name": "d", "values": [{"x": 1, "y": 2}, {"x": 3, "y": 1}]}],
            "scales": [
              {"name": "xs", "type": "linear", "range": {"type": "range", "value": "width"},
               "domain": {"data": "d", "field": "x"}, "clamp": false},
              {"name": "ys", "type": "linear", "range": {"type": "range", "value": "height"},
               "domain": {"data": "d", "field": "y"}, "clamp": false}],
            "axes": [{"type": "x", "scale": "xs", "orient": "edge", "grid": false, "ticks": 5}],
            "geom": [{"type": "Point", "data": "d",
                      "properties": {"x": "xs", "y": "ys", "fillColor": "#4c78a8",
                                     "size": 3}}]}"##,
    );
    assert!(!omitted.has_errors() && !explicit.has_errors());
    assert_eq!(
        emit_svg(&omitted.scene.unwrap()).unwrap(),
        emit_svg(&explicit.scene.unwrap()).unwrap()
    );
}

#[test]
fn warnings_do_not_abort() {
    // unused scale warning plus unknown top-level key warning
    let out = compile_str(
        r#"{"data": [{"name": "d", "values": [{"x": 1, "y": 2}]}],
            "bogus": true,
            "scales": [{"name": "unused", "type": "linear",
                        "range": {"type": "range", "value": [0, 1]},
                        "domain": {"data": "d", "field": "x"}}]}"#,
    );
    assert!(!out.has_errors());
    assert!(out
        .diagnostics
        .iter()
        .any(|d| d.severity == Severity::Warning));
    assert!(out.scene.is_some());
}

#[test]
fn flip_turns_vertical_bars_horizontal() {
    let upright = compile_file(&gallery_dir().join("bar.json"));
    let flipped = compile_file(&common::conformance_dir().join("coord_flip.json"));
    let bars = |out: &gogviz::compiler::CompileOutput| -> Vec<(f64, f64)> {
        out.scene
            .as_ref()
            .unwrap()
            .commands
            .iter()
            .filter_map(|c| match c {
                gogviz::RenderCommand::Rect { w, h, .. } => Some((*w, *h)),
                _ => None,
            })
            .collect()
    };
    // upright bars are taller than wide; flipped bars are wider than tall
    for (w, h) in bars(&upright) {
        assert!(h > w, "expected vertical bar, got {w}x{h}");
    }
    for (w, h) in bars(&flipped) {
        assert!(w > h, "expected horizontal bar, got {w}x{h}");
    }
}

#[test]
fn parallel_and_polar_parallel_share_record_fractions() {
    let parallel = compile_file(&gallery_dir().join("parallel.json"));
    let polar = compile_file(&gallery_dir().join("polar_parallel.json"));
    assert!(!parallel.has_errors(), "{:?}", errors_of(&parallel));
    assert!(!polar.has_errors(), "{:?}", errors_of(&polar));
    let fa = parallel.scene.unwrap().record_fractions.unwrap();
    let fb = polar.scene.unwrap().record_fractions.unwrap();
    assert_eq!(fa.len(), 12);
    assert_eq!(fa.len(), fb.len());
    for (ra, rb) in fa.iter().zip(&fb) {
        assert_eq!(ra.len(), rb.len());
        for (a, b) in ra.iter().zip(rb) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn every_diagnostic_path_resolves_into_the_input() {
    let broken = [
        r#"{"data": [{"name": "d", "values": [{"a": 1}], "extra": 1}],
            "scales": [{"name": "s", "type": "linnear",
                        "range": {"type": "range", "value": [0, 1]}, "domain": [0, 1]}]}"#,
        r#"{"data": [{"name": "d", "values": "f.csv", "url": "u"}]}"#,
        r#"{"data": [{"name": "d", "values": [{"a": 1}]}],
            "axes": [{"type": "y", "scale": "nope"}]}"#,
        r#"{"data": [{"name": "d", "values": [{"a": 1}]}],
            "transform": [{"type": "filter", "data": "ghost", "predicate": "a > 1"}]}"#,
        r#"{"data": [{"name": "d", "values": [{"a": "x"}]}],
            "scales": [{"name": "s", "type": "linear",
                        "range": {"type": "range", "value": [0, 1]},
                        "domain": {"data": "d", "field": "a"}}],
            "geom": [{"type": "HLine", "data": "d",
                      "properties": {"y": {"field": "a", "scale": "s"}}}]}"#,
    ];
    for spec in broken {
        let root: serde_json::Value = serde_json::from_str(spec).unwrap();
        let out = compile_str(spec);
        assert!(!out.diagnostics.is_empty(), "{spec}");
        for d in &out.diagnostics {
            assert!(
                root.pointer(&d.path).is_some(),
                "path {:?} does not resolve in input ({})",
                d.path,
                d.message
            );
        }
    }
}

#[test]
fn registry_datasets_are_visible_to_specs() {
    use gogviz::compiler::{compile_with_registry, MapResolver};
    use gogviz::datastore::{load_csv, DataRegistry};

    let mut registry = DataRegistry::new();
    let table = load_csv(b"x,y\n1,2\n3,4", "static", &mut Vec::new()).unwrap();
    registry.create(table).unwrap();
    let out = compile_with_registry(
        r#"{"data": [],
            "scales": [
              {"name": "xs", "type": "linear", "range": {"type": "range", "value": "width"},
               "domain": {"data": "static", "field": "x"}},
              {"name": "ys", "type": "linear", "range": {"type": "range", "value": "height"},
               "domain": {"data": "static", "field": "y"}}],
            "geom": [{"type": "Point", "data": "static",
                      "properties": {"x": "xs", "y": "ys"}}]}"#,
        &MapResolver::default(),
        &registry,
    );
    assert!(!out.has_errors(), "{:?}", errors_of(&out));
    assert_eq!(
        out.scene.unwrap().commands.iter().filter(|c| matches!(c, gogviz::RenderCommand::Circle { .. })).count(),
        2
    );
}

#[test]
fn tsv_and_json_file_sources_load() {
    let out = compile_str(
        r#"{"data": [
            {"name": "rain", "values": "rainfall.tsv", "format": {"type": "tsv"}},
            {"name": "pts", "values": "points.json", "format": {"type": "json"}}
          ],
          "scales": [
            {"name": "ms", "type": "ordinal", "range": {"type": "range", "value": "width"},
             "domain": {"data": "rain", "field": "month"}},
            {"name": "rs", "type": "linear", "range": {"type": "range", "value": "height"},
             "domain": [0, 70]},
            {"name": "xs", "type": "linear", "range": {"type": "range", "value": "width"},
             "domain": {"data": "pts", "field": "x"}},
            {"name": "ys", "type": "linear", "range": {"type": "range", "value": "height"},
             "domain": {"data": "pts", "field": "y"}}
          ],
          "geom": [
            {"type": "Bar", "data": "rain",
             "properties": {"x": "ms", "y": {"field": "rainfall", "scale": "rs"}}},
            {"type": "Point", "data": "pts", "properties": {"x": "xs", "y": "ys"}}
          ]}"#,
    );
    assert!(!out.has_errors(), "{:?}", errors_of(&out));
    let scene = out.scene.unwrap();
    let rects = scene.commands.iter().filter(|c| matches!(c, gogviz::RenderCommand::Rect { .. })).count();
    let circles = scene.commands.iter().filter(|c| matches!(c, gogviz::RenderCommand::Circle { .. })).count();
    assert_eq!((rects, circles), (3, 3));
}

#[test]
fn axis_transform_applies_before_scaling() {
    // a pow-2 transform on a scale-sourced axis rescales the tick domain:
    // data extent (1, 3) becomes (1, 9)
    let out = compile_str(
        r#"{"data": [{"name": "d", "values": [{"x": 1, "y": 1}, {"x": 2, "y": 2}, {"x": 3, "y": 3}]}],
            "scales": [
              {"name": "xs", "type": "linear", "range": {"type": "range", "value": "width"},
               "domain": {"data": "d", "field": "x"}},
              {"name": "ys", "type": "linear", "range": {"type": "range", "value": "height"},
               "domain": {"data": "d", "field": "y"}}],
            "axes": [{"type": "y", "scale": "ys",
                      "transform": {"function": "pow", "properties": {"power": 2, "name": "p"}}}],
            "geom": [{"type": "Point", "data": "d", "properties": {"x": "xs", "y": "ys"}}]}"#,
    );
    assert!(!out.has_errors(), "{:?}", errors_of(&out));
    let scene = out.scene.unwrap();
    let labels: Vec<f64> = scene
        .commands
        .iter()
        .filter_map(|c| match c {
            gogviz::RenderCommand::Text { content, .. } => content.parse().ok(),
            _ => None,
        })
        .collect();
    let max = labels.iter().cloned().fold(f64::MIN, f64::max);
    assert!(max > 3.0 && max <= 9.0, "transformed ticks should reach toward 9, got max {max}");
}

#[test]
fn area_with_explicit_lower_bound() {
    let out = compile_str(
        r#"{"data": [{"name": "band", "values": [
              {"t": 0, "hi": 8, "lo": 2}, {"t": 1, "hi": 9, "lo": 3}, {"t": 2, "hi": 7, "lo": 1}
            ]}],
            "scales": [
              {"name": "ts", "type": "linear", "range": {"type": "range", "value": "width"},
               "domain": {"data": "band", "field": "t"}},
              {"name": "vs", "type": "linear", "range": {"type": "range", "value": "height"},
               "domain": [0, 10]}],
            "geom": [{"type": "Area", "data": "band",
                      "properties": {"x": "ts", "y": {"field": "hi", "scale": "vs"},
                                     "y2": {"field": "lo", "scale": "vs"}}}]}"#,
    );
    assert!(!out.has_errors(), "{:?}", errors_of(&out));
    let scene = out.scene.unwrap();
    match &scene.commands[0] {
        gogviz::RenderCommand::Path { points, closed, .. } => {
            assert_eq!(points.len(), 6);
            assert!(*closed);
            // the lower boundary is not the zero line
            let max_y = points.iter().map(|p| p.1).fold(f64::MIN, f64::max);
            assert!(max_y < 360.0, "lower bound should sit above the zero line");
        }
        other => panic!("expected a path, got {other:?}"),
    }
}

#[test]
fn concurrent_compilations_share_a_registry_snapshot() {
    use gogviz::compiler::{compile_with_registry, MapResolver};
    use gogviz::datastore::{load_csv, DataRegistry};
    use std::sync::Arc;

    let mut registry = DataRegistry::new();
    registry
        .create(load_csv(b"x,y\n1,2\n3,4\n5,1", "shared", &mut Vec::new()).unwrap())
        .unwrap();
    let registry = Arc::new(registry);
    let spec: Arc<str> = Arc::from(
        r#"{"data": [],
            "scales": [
              {"name": "xs", "type": "linear", "range": {"type": "range", "value": "width"},
               "domain": {"data": "shared", "field": "x"}},
              {"name": "ys", "type": "linear", "range": {"type": "range", "value": "height"},
               "domain": {"data": "shared", "field": "y"}}],
            "geom": [{"type": "Point", "data": "shared",
                      "properties": {"x": "xs", "y": "ys"}}]}"#,
    );
    let outputs: Vec<Vec<u8>> = (0..8)
        .map(|_| {
            let registry = Arc::clone(&registry);
            let spec = Arc::clone(&spec);
            std::thread::spawn(move || {
                let out = compile_with_registry(&spec, &MapResolver::default(), &registry);
                assert!(!out.has_errors());
                emit_svg(&out.scene.unwrap()).unwrap()
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .map(|h| h.join().unwrap())
        .collect();
    for svg in &outputs[1..] {
        assert_eq!(svg, &outputs[0]);
    }
}

#[test]
fn validate_phase_summaries_exist_per_phase() {
    let out = compile_file(&gallery_dir().join("bar.json"));
    let phases: Vec<Phase> = out.phases.iter().map(|p| p.phase).collect();
    assert_eq!(phases, vec![Phase::Scan, Phase::Parse, Phase::Link, Phase::Assemble]);
}
