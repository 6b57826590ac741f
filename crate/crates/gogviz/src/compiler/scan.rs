//! Scan phase: validates the raw JSON specification against the grammar's
//! rule set, collecting every error and warning with a JSON-pointer path.
//!
//! Rules follow one convention for paths: a diagnostic about a bad value
//! anchors at that value; a diagnostic about a missing key anchors at the
//! containing object, so every path resolves into the input document.

use crate::diag::{Diagnostic, Phase};
use crate::geometry::{Channel, GeomKind};
use crate::scales::ScaleKind;
use serde_json::Value;

pub const COORD_TYPES: [&str; 5] = [
    "coord_equal",
    "coord_flip",
    "coord_polar",
    "coord_parallel",
    "coord_polar_parallel",
];

const STATS: [&str; 8] = ["mean", "std", "median", "min", "max", "count", "sum", "quantile"];
const TRANSFORM_TYPES: [&str; 5] = ["filter", "group", "join", "cross", "nest"];
const FUNCTIONS: [&str; 5] = ["fibonacci", "linspace", "pow", "log", "identity"];
const VARIABLE_FNS: [&str; 3] = ["pow", "log", "identity"];

/// Named colors accepted anywhere a color is expected, normalized to
/// `#rrggbb` at parse time.
pub const NAMED_COLORS: [(&str, &str); 11] = [
    ("black", "#000000"),
    ("white", "#ffffff"),
    ("red", "#ff0000"),
    ("green", "#008000"),
    ("blue", "#0000ff"),
    ("grey", "#808080"),
    ("gray", "#808080"),
    ("orange", "#ffa500"),
    ("purple", "#800080"),
    ("yellow", "#ffff00"),
    ("none", "none"),
];

pub fn is_color(s: &str) -> bool {
    if NAMED_COLORS.iter().any(|(n, _)| *n == s) {
        return true;
    }
    s.len() == 7 && s.starts_with('#') && s[1..].chars().all(|c| c.is_ascii_hexdigit())
}

pub fn normalize_color(s: &str) -> String {
    NAMED_COLORS
        .iter()
        .find(|(n, _)| *n == s)
        .map(|(_, hex)| hex.to_string())
        .unwrap_or_else(|| s.to_string())
}

fn is_shape(s: &str) -> bool {
    crate::geometry::SHAPES.contains(&s)
}

struct Scanner {
    diags: Vec<Diagnostic>,
}

impl Scanner {
    fn error(&mut self, path: String, message: impl Into<String>) {
        self.diags.push(Diagnostic::error(Phase::Scan, path, message));
    }

    fn warning(&mut self, path: String, message: impl Into<String>) {
        self.diags.push(Diagnostic::warning(Phase::Scan, path, message));
    }

    fn check_keys(&mut self, obj: &serde_json::Map<String, Value>, path: &str, allowed: &[&str]) {
        for key in obj.keys() {
            if !allowed.contains(&key.as_str()) {
                self.warning(format!("{path}/{key}"), format!("unknown key {key:?}"));
            }
        }
    }

    fn require_string(&mut self, obj: &serde_json::Map<String, Value>, path: &str, key: &str) -> Option<String> {
        match obj.get(key) {
            Some(Value::String(s)) if !s.is_empty() => Some(s.clone()),
            Some(_) => {
                self.error(format!("{path}/{key}"), format!("{key:?} must be a non-empty string"));
                None
            }
            None => {
                self.error(path.to_string(), format!("missing required key {key:?}"));
                None
            }
        }
    }
}

/// Validates the raw spec. Returns every diagnostic the rule set produced;
/// the caller aborts after this phase if any is an error.
pub fn scan(root: &Value) -> Vec<Diagnostic> {
    let mut s = Scanner { diags: Vec::new() };
    let Some(top) = root.as_object() else {
        s.error(String::new(), "specification root must be a JSON object");
        return s.diags;
    };
    s.check_keys(
        top,
        "",
        &["width", "height", "padding", "data", "transform", "scales", "axes", "geom", "guides"],
    );

    // frame numbers, and the effective inner extent with defaults applied
    let mut dims = [600.0, 400.0, 40.0];
    for (i, key) in ["width", "height", "padding"].iter().enumerate() {
        if let Some(v) = top.get(*key) {
            match v.as_f64() {
                Some(n) if n.is_finite() && (n > 0.0 || (i == 2 && n >= 0.0)) => dims[i] = n,
                _ => s.error(format!("/{key}"), format!("{key:?} must be a positive number")),
            }
        }
    }
    if dims[0] - 2.0 * dims[2] <= 0.0 || dims[1] - 2.0 * dims[2] <= 0.0 {
        s.error(
            String::new(),
            format!(
                "padding {} leaves no inner plot area inside {}x{}",
                dims[2], dims[0], dims[1]
            ),
        );
    }

    match top.get("data") {
        Some(Value::Array(entries)) => scan_data(&mut s, entries),
        Some(_) => s.error("/data".into(), "\"data\" must be an array of dataset entries"),
        None => s.error(String::new(), "missing required key \"data\""),
    }
    if let Some(v) = top.get("transform") {
        match v.as_array() {
            Some(steps) => scan_transform(&mut s, steps),
            None => s.error("/transform".into(), "\"transform\" must be an array"),
        }
    }
    if let Some(v) = top.get("scales") {
        match v.as_array() {
            Some(scales) => scan_scales(&mut s, scales),
            None => s.error("/scales".into(), "\"scales\" must be an array"),
        }
    }
    if let Some(v) = top.get("axes") {
        scan_axes(&mut s, v);
    }
    if let Some(v) = top.get("geom") {
        match v.as_array() {
            Some(geoms) => scan_geoms(&mut s, geoms),
            None => s.error("/geom".into(), "\"geom\" must be an array"),
        }
    }
    if let Some(v) = top.get("guides") {
        match v.as_array() {
            Some(guides) => scan_guides(&mut s, guides),
            None => s.error("/guides".into(), "\"guides\" must be an array"),
        }
    }
    s.diags
}

fn scan_data(s: &mut Scanner, entries: &[Value]) {
    let mut names: Vec<String> = Vec::new();
    for (i, entry) in entries.iter().enumerate() {
        let path = format!("/data/{i}");
        let Some(obj) = entry.as_object() else {
            s.error(path, "dataset entry must be an object");
            continue;
        };
        s.check_keys(obj, &path, &["name", "values", "url", "format"]);
        if let Some(name) = s.require_string(obj, &path, "name") {
            if names.contains(&name) {
                s.error(format!("{path}/name"), format!("duplicate dataset name {name:?}"));
            }
            names.push(name);
        }
        let has_values = obj.contains_key("values");
        let has_url = obj.contains_key("url");
        if has_values && has_url {
            s.error(
                path.clone(),
                "dataset has both \"values\" and \"url\"; exactly one source is necessary",
            );
        } else if has_url {
            s.error(
                format!("{path}/url"),
                "remote url sources are not supported; use \"values\" with a file path or inline rows",
            );
        } else if !has_values {
            s.error(path.clone(), "missing required key \"values\"");
        }
        let inline = match obj.get("values") {
            Some(Value::String(_)) => false,
            Some(Value::Array(rows)) => {
                for (r, row) in rows.iter().enumerate() {
                    if !row.is_object() {
                        s.error(
                            format!("{path}/values/{r}"),
                            "inline rows must be flat JSON objects",
                        );
                    }
                }
                true
            }
            Some(_) => {
                s.error(
                    format!("{path}/values"),
                    "\"values\" must be a file path string or an inline array of rows",
                );
                false
            }
            None => false,
        };
        if let Some(format) = obj.get("format") {
            let fpath = format!("{path}/format");
            match format.as_object() {
                Some(fobj) => {
                    s.check_keys(fobj, &fpath, &["type"]);
                    match fobj.get("type") {
                        Some(Value::String(t)) if ["csv", "tsv", "json"].contains(&t.as_str()) => {
                            if inline && t != "json" {
                                s.warning(
                                    format!("{fpath}/type"),
                                    format!("format {t:?} is ignored for inline values"),
                                );
                            }
                        }
                        Some(Value::String(t)) => s.error(
                            format!("{fpath}/type"),
                            format!("unknown format type {t:?}; legal values: csv, tsv, json"),
                        ),
                        Some(_) => s.error(format!("{fpath}/type"), "format type must be a string"),
                        None => s.error(fpath, "missing required key \"type\""),
                    }
                }
                None => s.error(fpath, "\"format\" must be an object"),
            }
        }
    }
}

fn scan_transform(s: &mut Scanner, steps: &[Value]) {
    for (i, step) in steps.iter().enumerate() {
        let path = format!("/transform/{i}");
        let Some(obj) = step.as_object() else {
            s.error(path, "transform step must be an object");
            continue;
        };
        if let Some(lang) = obj.get("lang") {
            match lang.as_str() {
                Some("builtin") => {}
                Some(other) => s.error(
                    format!("{path}/lang"),
                    format!("transform language {other:?} is not supported; only \"builtin\""),
                ),
                None => s.error(format!("{path}/lang"), "\"lang\" must be a string"),
            }
        }
        match (obj.get("type"), obj.get("function")) {
            (Some(_), Some(_)) => {
                s.error(path.clone(), "transform step has both \"type\" and \"function\"; use one");
            }
            (Some(Value::String(t)), None) => scan_typed_step(s, obj, &path, t),
            (Some(_), None) => s.error(format!("{path}/type"), "\"type\" must be a string"),
            (None, Some(Value::String(f))) => scan_function_step(s, obj, &path, f),
            (None, Some(_)) => s.error(format!("{path}/function"), "\"function\" must be a string"),
            (None, None) => s.error(path.clone(), "transform step needs \"type\" or \"function\""),
        }
    }
}

fn scan_typed_step(s: &mut Scanner, obj: &serde_json::Map<String, Value>, path: &str, t: &str) {
    if !TRANSFORM_TYPES.contains(&t) {
        s.error(
            format!("{path}/type"),
            format!("unknown transform type {t:?}; legal values: {}", TRANSFORM_TYPES.join(", ")),
        );
        return;
    }
    match t {
        "filter" => {
            s.check_keys(obj, path, &["lang", "type", "data", "predicate", "name"]);
            s.require_string(obj, path, "data");
            s.require_string(obj, path, "predicate");
        }
        "group" => {
            s.check_keys(obj, path, &["lang", "type", "data", "keys", "aggregates", "name"]);
            s.require_string(obj, path, "data");
            match obj.get("keys") {
                Some(Value::Array(keys)) if !keys.is_empty() => {
                    for (k, key) in keys.iter().enumerate() {
                        if !key.is_string() {
                            s.error(format!("{path}/keys/{k}"), "group keys must be field names");
                        }
                    }
                }
                _ => s.error(path.to_string(), "group needs a non-empty \"keys\" array"),
            }
            match obj.get("aggregates") {
                Some(Value::Array(aggs)) => {
                    for (a, agg) in aggs.iter().enumerate() {
                        let apath = format!("{path}/aggregates/{a}");
                        let Some(aobj) = agg.as_object() else {
                            s.error(apath, "aggregate must be an object");
                            continue;
                        };
                        s.check_keys(aobj, &apath, &["field", "stat", "name", "p"]);
                        s.require_string(aobj, &apath, "field");
                        s.require_string(aobj, &apath, "name");
                        match aobj.get("stat").and_then(Value::as_str) {
                            Some(stat) if STATS.contains(&stat) => {}
                            Some(stat) => s.error(
                                format!("{apath}/stat"),
                                format!("unknown statistic {stat:?}; legal values: {}", STATS.join(", ")),
                            ),
                            None => s.error(apath.clone(), "missing required key \"stat\""),
                        }
                    }
                }
                _ => s.error(path.to_string(), "group needs an \"aggregates\" array"),
            }
        }
        "join" => {
            s.check_keys(obj, path, &["lang", "type", "left", "right", "key", "side", "name"]);
            s.require_string(obj, path, "left");
            s.require_string(obj, path, "right");
            s.require_string(obj, path, "key");
            s.require_string(obj, path, "name");
            match obj.get("side").and_then(Value::as_str) {
                Some("left") | Some("right") | None => {}
                Some(other) => s.error(
                    format!("{path}/side"),
                    format!("unknown join side {other:?}; legal values: left, right"),
                ),
            }
        }
        "cross" => {
            s.check_keys(obj, path, &["lang", "type", "left", "right", "name"]);
            s.require_string(obj, path, "left");
            s.require_string(obj, path, "right");
            s.require_string(obj, path, "name");
        }
        "nest" => {
            s.check_keys(obj, path, &["lang", "type", "data", "x", "y", "fields", "name"]);
            s.require_string(obj, path, "data");
            s.require_string(obj, path, "x");
            s.require_string(obj, path, "y");
            s.require_string(obj, path, "name");
            match obj.get("fields") {
                Some(Value::Array(fields)) if (1..=9).contains(&fields.len()) => {
                    for (f, field) in fields.iter().enumerate() {
                        if !field.is_string() {
                            s.error(format!("{path}/fields/{f}"), "glyph fields must be field names");
                        }
                    }
                }
                Some(Value::Array(fields)) => s.error(
                    format!("{path}/fields"),
                    format!("nest takes 1 to 9 glyph fields, got {}", fields.len()),
                ),
                _ => s.error(path.to_string(), "nest needs a \"fields\" array"),
            }
        }
        _ => unreachable!(),
    }
}

fn scan_function_step(s: &mut Scanner, obj: &serde_json::Map<String, Value>, path: &str, f: &str) {
    s.check_keys(obj, path, &["lang", "function", "properties"]);
    if !FUNCTIONS.contains(&f) {
        s.error(
            format!("{path}/function"),
            format!("unknown function {f:?}; legal values: {}", FUNCTIONS.join(", ")),
        );
        return;
    }
    let ppath = format!("{path}/properties");
    let Some(props) = obj.get("properties").and_then(Value::as_object) else {
        s.error(path.to_string(), "function step needs a \"properties\" object");
        return;
    };
    s.require_string(props, &ppath, "name");
    if VARIABLE_FNS.contains(&f) {
        s.check_keys(props, &ppath, &["data", "field", "name", "output", "power"]);
        s.require_string(props, &ppath, "data");
        s.require_string(props, &ppath, "field");
        if f == "pow" {
            if let Some(p) = props.get("power") {
                if p.as_f64().is_none() {
                    s.error(format!("{ppath}/power"), "\"power\" must be a number");
                }
            }
        }
    } else {
        s.check_keys(props, &ppath, &["length", "field", "name", "start", "stop", "data"]);
        match props.get("length") {
            Some(v) if v.as_u64().is_some() => {}
            Some(_) => s.error(format!("{ppath}/length"), "\"length\" must be a non-negative integer"),
            None => s.error(ppath.clone(), "missing required key \"length\""),
        }
        if f == "linspace" {
            for key in ["start", "stop"] {
                match props.get(key) {
                    Some(v) if v.as_f64().is_some() => {}
                    Some(_) => s.error(format!("{ppath}/{key}"), format!("{key:?} must be a number")),
                    None => s.error(ppath.clone(), format!("missing required key {key:?}")),
                }
            }
        }
    }
}

fn scan_scales(s: &mut Scanner, scales: &[Value]) {
    let mut names: Vec<String> = Vec::new();
    for (i, scale) in scales.iter().enumerate() {
        let path = format!("/scales/{i}");
        let Some(obj) = scale.as_object() else {
            s.error(path, "scale must be an object");
            continue;
        };
        s.check_keys(obj, &path, &["name", "type", "range", "domain", "exponent", "clamp"]);
        if let Some(name) = s.require_string(obj, &path, "name") {
            if names.contains(&name) {
                s.error(format!("{path}/name"), format!("duplicate scale name {name:?}"));
            }
            names.push(name);
        }
        match obj.get("type").and_then(Value::as_str) {
            Some(t) if ScaleKind::parse(t).is_some() => {}
            Some(t) => s.error(
                format!("{path}/type"),
                format!("unknown scale type {t:?}; legal values: {}", ScaleKind::ALL.join(", ")),
            ),
            None => s.error(path.clone(), "missing required key \"type\""),
        }
        if let Some(range) = obj.get("range") {
            scan_range(s, range, &format!("{path}/range"));
        }
        match obj.get("domain") {
            Some(domain) => scan_domain(s, domain, &format!("{path}/domain")),
            None => s.error(path.clone(), "missing required key \"domain\""),
        }
        if let Some(e) = obj.get("exponent") {
            if e.as_f64().is_none() {
                s.error(format!("{path}/exponent"), "\"exponent\" must be a number");
            }
        }
        if let Some(c) = obj.get("clamp") {
            if !c.is_boolean() {
                s.error(format!("{path}/clamp"), "\"clamp\" must be a boolean");
            }
        }
    }
}

fn scan_range(s: &mut Scanner, range: &Value, path: &str) {
    let Some(obj) = range.as_object() else {
        s.error(path.to_string(), "\"range\" must be an object with \"type\" and \"value\"");
        return;
    };
    s.check_keys(obj, path, &["type", "value"]);
    match obj.get("type").and_then(Value::as_str) {
        Some("range") => {}
        Some(t) => s.error(format!("{path}/type"), format!("unknown range type {t:?}; legal values: range")),
        None => s.error(path.to_string(), "missing required key \"type\""),
    }
    match obj.get("value") {
        Some(Value::String(dim)) if dim == "width" || dim == "height" => {}
        Some(Value::String(dim)) => s.error(
            format!("{path}/value"),
            format!("unknown named range {dim:?}; legal values: width, height"),
        ),
        Some(Value::Array(items)) if !items.is_empty() => {
            let all_numbers = items.iter().all(Value::is_number);
            let all_strings = items.iter().all(Value::is_string);
            if !(all_numbers || all_strings) {
                s.error(
                    format!("{path}/value"),
                    "range list must be all numbers or all strings",
                );
            }
            if all_strings {
                for (j, item) in items.iter().enumerate() {
                    let v = item.as_str().unwrap();
                    if !(is_color(v) || is_shape(v)) {
                        s.error(
                            format!("{path}/value/{j}"),
                            format!("{v:?} is neither a #rrggbb/named color nor a shape name"),
                        );
                    }
                }
            }
        }
        Some(_) => s.error(
            format!("{path}/value"),
            "range value must be [r0, r1], \"width\"/\"height\", or a discrete list",
        ),
        None => s.error(path.to_string(), "missing required key \"value\""),
    }
}

fn scan_domain(s: &mut Scanner, domain: &Value, path: &str) {
    match domain {
        Value::Object(obj) => {
            s.check_keys(obj, path, &["data", "field"]);
            s.require_string(obj, path, "data");
            s.require_string(obj, path, "field");
        }
        Value::Array(items) if !items.is_empty() => {
            let ok = items.iter().all(|v| v.is_number() || v.is_string() || v.is_boolean());
            if !ok {
                s.error(path.to_string(), "explicit domain entries must be numbers, strings, or booleans");
            }
        }
        _ => s.error(
            path.to_string(),
            "\"domain\" must be {data, field} or an explicit value list",
        ),
    }
}

fn scan_axes(s: &mut Scanner, axes: &Value) {
    match axes {
        Value::Array(entries) => {
            for (i, entry) in entries.iter().enumerate() {
                scan_axis_entry(s, entry, &format!("/axes/{i}"), false);
            }
        }
        Value::Object(obj) => {
            s.check_keys(obj, "/axes", &["type", "properties", "inset"]);
            let coord = match obj.get("type").and_then(Value::as_str) {
                Some(t) if COORD_TYPES.contains(&t) => Some(t),
                Some(t) if t == "x" || t == "y" => {
                    s.error(
                        "/axes/type".into(),
                        "a single axis must be wrapped in an array; the object form is for coord_* types",
                    );
                    None
                }
                Some(t) => {
                    s.error(
                        "/axes/type".into(),
                        format!("unknown axes type {t:?}; legal values: x, y, {}", COORD_TYPES.join(", ")),
                    );
                    None
                }
                None => {
                    s.error("/axes".into(), "missing required key \"type\"");
                    None
                }
            };
            if let Some(inset) = obj.get("inset") {
                match inset.as_f64() {
                    Some(v) if (0.0..1.0).contains(&v) => {}
                    _ => s.error("/axes/inset".into(), "\"inset\" must be a number in [0, 1)"),
                }
            }
            let parallel = matches!(coord, Some("coord_parallel") | Some("coord_polar_parallel"));
            match obj.get("properties") {
                Some(Value::Array(entries)) => {
                    if parallel && entries.len() < 2 {
                        s.error(
                            "/axes/properties".into(),
                            format!("parallel coordinates need at least 2 axes, got {}", entries.len()),
                        );
                    }
                    for (i, entry) in entries.iter().enumerate() {
                        scan_axis_entry(s, entry, &format!("/axes/properties/{i}"), parallel);
                    }
                }
                Some(_) => s.error("/axes/properties".into(), "\"properties\" must be an array"),
                None => {
                    if parallel {
                        s.error("/axes".into(), "parallel coordinates need a \"properties\" axis list");
                    }
                }
            }
        }
        _ => s.error("/axes".into(), "\"axes\" must be an array of axes or a coord_* object"),
    }
}

fn scan_axis_entry(s: &mut Scanner, entry: &Value, path: &str, parallel: bool) {
    let Some(obj) = entry.as_object() else {
        s.error(path.to_string(), "axis must be an object");
        return;
    };
    s.check_keys(
        obj,
        path,
        &["type", "scale", "data", "field", "orient", "grid", "ticks", "text", "annotation", "transform"],
    );
    let ty = obj.get("type").and_then(Value::as_str);
    match ty {
        Some("x") | Some("y") => {}
        Some(t) => s.error(
            format!("{path}/type"),
            format!("unknown axis type {t:?}; legal values: x, y"),
        ),
        None => s.error(path.to_string(), "missing required key \"type\""),
    }
    let has_scale = obj.contains_key("scale");
    let has_data = obj.contains_key("data") || obj.contains_key("field");
    match (has_scale, has_data) {
        (true, true) => s.error(
            path.to_string(),
            "axis has both a scale name and a (data, field) reference; exactly one is necessary",
        ),
        (false, false) => s.error(
            path.to_string(),
            "axis needs either \"scale\" or a (data, field) reference",
        ),
        (true, false) => {
            s.require_string(obj, path, "scale");
        }
        (false, true) => {
            s.require_string(obj, path, "data");
            s.require_string(obj, path, "field");
        }
    }
    if let Some(orient) = obj.get("orient") {
        match orient.as_str() {
            Some(o) if ["left", "right", "top", "bottom", "edge"].contains(&o) => {
                // parallel axes place themselves; orient is advisory there
                if !parallel {
                    let legal = match ty {
                        Some("x") => ["bottom", "top", "edge"].contains(&o),
                        Some("y") => ["left", "right", "edge"].contains(&o),
                        _ => true,
                    };
                    if !legal {
                        s.error(
                            format!("{path}/orient"),
                            format!("orient {o:?} is not legal for a {:?} axis", ty.unwrap_or("?")),
                        );
                    }
                }
            }
            _ => s.error(
                format!("{path}/orient"),
                "\"orient\" must be one of left, right, top, bottom, edge",
            ),
        }
    }
    if let Some(grid) = obj.get("grid") {
        if !grid.is_boolean() {
            s.error(format!("{path}/grid"), "\"grid\" must be a boolean");
        }
    }
    if let Some(ticks) = obj.get("ticks") {
        match ticks.as_u64() {
            Some(t) if t >= 2 => {}
            _ => s.error(format!("{path}/ticks"), "\"ticks\" must be an integer of at least 2"),
        }
    }
    if let Some(text) = obj.get("text") {
        scan_text_style(s, text, &format!("{path}/text"));
    }
    if let Some(ann) = obj.get("annotation") {
        let apath = format!("{path}/annotation");
        match ann.as_object() {
            Some(aobj) => {
                s.check_keys(aobj, &apath, &["title", "position", "font", "colour", "color"]);
                s.require_string(aobj, &apath, "title");
                if let Some(pos) = aobj.get("position") {
                    match pos.as_str() {
                        Some("edge") | Some("middle") => {}
                        _ => s.error(
                            format!("{apath}/position"),
                            "annotation position must be \"edge\" or \"middle\"",
                        ),
                    }
                }
                scan_color_key(s, aobj, &apath);
            }
            None => s.error(apath, "\"annotation\" must be an object"),
        }
    }
    if let Some(tr) = obj.get("transform") {
        let tpath = format!("{path}/transform");
        match tr.as_object() {
            Some(tobj) => {
                s.check_keys(tobj, &tpath, &["function", "properties"]);
                match tobj.get("function").and_then(Value::as_str) {
                    Some(f) if VARIABLE_FNS.contains(&f) => {}
                    Some(f) => s.error(
                        format!("{tpath}/function"),
                        format!("unknown axis transform {f:?}; legal values: {}", VARIABLE_FNS.join(", ")),
                    ),
                    None => s.error(tpath.clone(), "missing required key \"function\""),
                }
                if let Some(props) = tobj.get("properties") {
                    if let Some(pobj) = props.as_object() {
                        s.check_keys(pobj, &format!("{tpath}/properties"), &["power", "name"]);
                        if let Some(p) = pobj.get("power") {
                            if p.as_f64().is_none() {
                                s.error(format!("{tpath}/properties/power"), "\"power\" must be a number");
                            }
                        }
                    } else {
                        s.error(format!("{tpath}/properties"), "\"properties\" must be an object");
                    }
                }
            }
            None => s.error(tpath, "\"transform\" must be an object"),
        }
    }
}

fn scan_text_style(s: &mut Scanner, text: &Value, path: &str) {
    match text.as_object() {
        Some(obj) => {
            s.check_keys(obj, path, &["font", "colour", "color"]);
            if let Some(f) = obj.get("font") {
                if !f.is_string() {
                    s.error(format!("{path}/font"), "\"font\" must be a string");
                }
            }
            scan_color_key(s, obj, path);
        }
        None => s.error(path.to_string(), "text style must be an object"),
    }
}

fn scan_color_key(s: &mut Scanner, obj: &serde_json::Map<String, Value>, path: &str) {
    for key in ["colour", "color"] {
        if let Some(c) = obj.get(key) {
            match c.as_str() {
                Some(c) if is_color(c.trim()) => {}
                Some(c) => s.error(
                    format!("{path}/{key}"),
                    format!("{c:?} is not a #rrggbb or named color"),
                ),
                None => s.error(format!("{path}/{key}"), "color must be a string"),
            }
        }
    }
}

fn scan_geoms(s: &mut Scanner, geoms: &[Value]) {
    for (i, geom) in geoms.iter().enumerate() {
        let path = format!("/geom/{i}");
        let Some(obj) = geom.as_object() else {
            s.error(path, "geometry must be an object");
            continue;
        };
        s.check_keys(obj, &path, &["type", "data", "properties"]);
        let kind = match obj.get("type").and_then(Value::as_str) {
            Some(t) => match GeomKind::parse(t) {
                Some(k) => Some(k),
                None => {
                    s.error(
                        format!("{path}/type"),
                        format!("unknown geometry type {t:?}; legal values: {}", GeomKind::ALL.join(", ")),
                    );
                    None
                }
            },
            None => {
                s.error(path.clone(), "missing required key \"type\"");
                None
            }
        };
        s.require_string(obj, &path, "data");
        let ppath = format!("{path}/properties");
        let props = match obj.get("properties") {
            Some(Value::Object(p)) => Some(p),
            Some(_) => {
                s.error(ppath.clone(), "\"properties\" must be an object");
                None
            }
            None => None,
        };
        if let Some(props) = props {
            for (key, value) in props {
                let kpath = format!("{ppath}/{key}");
                if key == "bins" {
                    match value.as_u64() {
                        Some(b) if b >= 1 => {}
                        _ => s.error(kpath, "\"bins\" must be a positive integer"),
                    }
                    continue;
                }
                let Some(channel) = Channel::parse(key) else {
                    s.warning(kpath, format!("unknown channel {key:?}"));
                    continue;
                };
                scan_binding(s, channel, value, &kpath);
            }
        }
        if let Some(kind) = kind {
            let required: &[&str] = match kind {
                GeomKind::Point | GeomKind::Line | GeomKind::Area | GeomKind::Marks | GeomKind::Picture => {
                    &["x", "y"]
                }
                GeomKind::Bar | GeomKind::VerticalBar => &["x", "y"],
                GeomKind::StackedBar => &["x", "y", "group"],
                GeomKind::Histogram => &["field"],
                GeomKind::Pie | GeomKind::Arc => &["value"],
                GeomKind::HLine => &["y"],
                GeomKind::VLine => &["x"],
                GeomKind::Text => &["x", "y", "text"],
            };
            for key in required {
                let bound = props.is_some_and(|p| {
                    p.contains_key(*key) || (*key == "value" && p.contains_key("field")) || (*key == "field" && p.contains_key("value"))
                });
                if !bound {
                    s.error(
                        if props.is_some() { ppath.clone() } else { path.clone() },
                        format!("geometry {kind:?} requires the {key:?} channel"),
                    );
                }
            }
        }
    }
}

fn scan_binding(s: &mut Scanner, channel: Channel, value: &Value, path: &str) {
    match value {
        Value::String(name) => {
            // a scale name, except literal colors on color channels and
            // fonts on the font channel
            let color_channel = matches!(channel, Channel::Fill | Channel::Stroke);
            if color_channel && name.starts_with('#') && !is_color(name) {
                s.error(path.to_string(), format!("{name:?} is not a #rrggbb color"));
            }
            if name.is_empty() {
                s.error(path.to_string(), "binding string must not be empty");
            }
        }
        Value::Number(_) => {}
        Value::Object(obj) => {
            s.check_keys(obj, path, &["field", "scale", "value"]);
            let has_field = obj.contains_key("field");
            let has_value = obj.contains_key("value");
            if has_field && has_value {
                s.error(path.to_string(), "binding has both \"field\" and \"value\"; use one");
            } else if !has_field && !has_value {
                s.error(path.to_string(), "binding object needs \"field\" or \"value\"");
            }
            if let Some(f) = obj.get("field") {
                if !f.is_string() {
                    s.error(format!("{path}/field"), "\"field\" must be a string");
                }
            }
            if let Some(sc) = obj.get("scale") {
                if !sc.is_string() {
                    s.error(format!("{path}/scale"), "\"scale\" must be a string");
                }
            }
            if let Some(v) = obj.get("value") {
                if !(v.is_number() || v.is_string() || v.is_boolean()) {
                    s.error(format!("{path}/value"), "\"value\" must be a number, string, or boolean");
                }
                if matches!(channel, Channel::Fill | Channel::Stroke) {
                    if let Some(c) = v.as_str() {
                        if !is_color(c) {
                            s.error(
                                format!("{path}/value"),
                                format!("{c:?} is not a #rrggbb or named color"),
                            );
                        }
                    }
                }
            }
        }
        _ => s.error(path.to_string(), "binding must be a scale name, a constant, or an object"),
    }
}

fn scan_guides(s: &mut Scanner, guides: &[Value]) {
    for (i, guide) in guides.iter().enumerate() {
        let path = format!("/guides/{i}");
        let Some(obj) = guide.as_object() else {
            s.error(path, "guide must be an object");
            continue;
        };
        s.check_keys(obj, &path, &["type", "scale", "domain", "properties"]);
        match obj.get("type").and_then(Value::as_str) {
            Some("legend") => {}
            Some(t) => s.error(
                format!("{path}/type"),
                format!("unknown guide type {t:?}; legal values: legend"),
            ),
            None => s.error(path.clone(), "missing required key \"type\""),
        }
        let scale_ok = matches!(obj.get("scale"), Some(Value::String(_)))
            || matches!(obj.get("domain"), Some(Value::String(_)))
            || obj
                .get("domain")
                .and_then(Value::as_object)
                .is_some_and(|d| matches!(d.get("scale"), Some(Value::String(_))));
        if !scale_ok {
            s.error(path.clone(), "legend needs a scale reference (\"scale\" or \"domain\")");
        }
        if let Some(props) = obj.get("properties") {
            let ppath = format!("{path}/properties");
            match props.as_object() {
                Some(pobj) => {
                    s.check_keys(pobj, &ppath, &["title", "position"]);
                    if let Some(title) = pobj.get("title") {
                        let ok = title.is_string()
                            || title
                                .as_object()
                                .is_some_and(|t| matches!(t.get("name"), Some(Value::String(_))));
                        if !ok {
                            s.error(
                                format!("{ppath}/title"),
                                "title must be a string or {name: string}",
                            );
                        }
                    }
                    if let Some(pos) = pobj.get("position") {
                        let ok = pos.as_object().is_some_and(|p| {
                            p.get("x").is_some_and(Value::is_number)
                                && p.get("y").is_some_and(Value::is_number)
                        });
                        if !ok {
                            s.error(
                                format!("{ppath}/position"),
                                "position must be {x: number, y: number}",
                            );
                        }
                    }
                }
                None => s.error(ppath, "\"properties\" must be an object"),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diag::has_errors;

    fn scan_str(s: &str) -> Vec<Diagnostic> {
        scan(&serde_json::from_str(s).unwrap())
    }

    #[test]
    fn minimal_valid_spec() {
        let diags = scan_str(r#"{"data": [{"name": "d", "values": [{"a": 1}]}]}"#);
        assert!(!has_errors(&diags), "{diags:?}");
    }

    #[test]
    fn missing_data_block() {
        let diags = scan_str("{}");
        assert!(diags.iter().any(|d| d.is_error() && d.message.contains("\"data\"")));
    }

    #[test]
    fn unknown_scale_type_names_path_and_legal_values() {
        let diags = scan_str(
            r#"{"data": [{"name": "d", "values": [{"a": 1}]}],
                "scales": [{"name": "s", "type": "linnear",
                            "range": {"type": "range", "value": [0, 1]},
                            "domain": [0, 1]}]}"#,
        );
        let err = diags.iter().find(|d| d.is_error()).unwrap();
        assert_eq!(err.path, "/scales/0/type");
        assert!(err.message.contains("linnear"));
        assert!(err.message.contains("linear, log, exp, quantile, ordinal"));
    }

    #[test]
    fn dual_source_rejected() {
        let diags = scan_str(
            r#"{"data": [{"name": "d", "values": "f.csv", "url": "http://x/f.csv"}]}"#,
        );
        assert!(diags
            .iter()
            .any(|d| d.is_error() && d.path == "/data/0" && d.message.contains("one source is necessary")));
    }

    #[test]
    fn missing_fill_color_is_fine() {
        let diags = scan_str(
            r#"{"data": [{"name": "d", "values": [{"x": 1, "y": 2}]}],
                "geom": [{"type": "Point", "data": "d",
                          "properties": {"x": {"field": "x"}, "y": {"field": "y"}}}]}"#,
        );
        assert!(!has_errors(&diags), "{diags:?}");
    }

    #[test]
    fn unknown_top_level_key_warns() {
        let diags = scan_str(r#"{"data": [{"name": "d", "values": [{"a": 1}]}], "bogus": 1}"#);
        assert!(diags.iter().any(|d| !d.is_error() && d.path == "/bogus"));
        assert!(!has_errors(&diags));
    }

    #[test]
    fn r_language_transform_rejected() {
        let diags = scan_str(
            r#"{"data": [{"name": "d", "values": [{"a": 1}]}],
                "transform": [{"lang": "R", "function": "fibonacci",
                               "properties": {"length": 5, "field": "x", "name": "fib"}}]}"#,
        );
        assert!(diags.iter().any(|d| d.is_error() && d.path == "/transform/0/lang"));
    }

    #[test]
    fn geom_missing_required_channel() {
        let diags = scan_str(
            r#"{"data": [{"name": "d", "values": [{"x": 1}]}],
                "geom": [{"type": "Point", "data": "d", "properties": {"x": {"field": "x"}}}]}"#,
        );
        assert!(diags.iter().any(|d| d.is_error() && d.message.contains("\"y\"")));
    }

    #[test]
    fn padding_swallowing_frame_rejected() {
        let diags = scan_str(
            r#"{"width": 100, "height": 100, "padding": 60,
                "data": [{"name": "d", "values": [{"a": 1}]}]}"#,
        );
        assert!(has_errors(&diags));
    }

    #[test]
    fn parallel_needs_two_axes() {
        let diags = scan_str(
            r#"{"data": [{"name": "d", "values": [{"a": 1}]}],
                "axes": {"type": "coord_parallel",
                         "properties": [{"type": "y", "data": "d", "field": "a"}]}}"#,
        );
        assert!(diags.iter().any(|d| d.is_error() && d.message.contains("at least 2 axes")));
    }

    #[test]
    fn axis_dual_source_rejected() {
        let diags = scan_str(
            r#"{"data": [{"name": "d", "values": [{"a": 1}]}],
                "axes": [{"type": "x", "scale": "s", "data": "d", "field": "a"}]}"#,
        );
        assert!(diags.iter().any(|d| d.is_error() && d.message.contains("exactly one is necessary")));
    }

    #[test]
    fn bad_orient_for_axis_type() {
        let diags = scan_str(
            r#"{"data": [{"name": "d", "values": [{"a": 1}]}],
                "axes": [{"type": "x", "data": "d", "field": "a", "orient": "left"}]}"#,
        );
        assert!(diags.iter().any(|d| d.is_error() && d.path == "/axes/0/orient"));
    }
}
