//! Parse phase: builds the typed, defaults-filled [`SpecTree`] from a
//! scanned raw spec. Every filled default is recorded with its path so the
//! debug surface can report provenance (user value vs default).

use crate::compiler::scan::normalize_color;
use crate::geometry::{BindingSpec, Channel, ConstValue, GeomKind, GeomSpec};
use crate::guides::{Annotation, AxisRole, AxisSource, AxisSpec, GuideSpec, Orient, TextStyle, DEFAULT_TICK_TARGET};
use crate::scales::{DomainSpec, RangeSpec, Dimension, RangeValue, ScaleDef, ScaleKind};
use crate::transform::{AggregateSpec, JoinSide, Stat, TransformStep, VariableFn};
use crate::value::DataValue;
use serde_json::Value;
use std::collections::BTreeMap;

pub const DEFAULT_WIDTH: f64 = 600.0;
pub const DEFAULT_HEIGHT: f64 = 400.0;
pub const DEFAULT_PADDING: f64 = 40.0;
pub const DEFAULT_POLAR_PARALLEL_INSET: f64 = 0.1;

/// One dataset declaration.
#[derive(Debug, Clone, PartialEq)]
pub struct DataDef {
    pub name: String,
    pub source: DataSource,
    pub format: DataFormat,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    File(String),
    Inline(Value),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Csv,
    Tsv,
    Json,
}

/// The coordinate system selected by the axes block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordKind {
    Cartesian,
    Equal,
    Flip,
    Polar,
    Parallel,
    PolarParallel,
}

impl CoordKind {
    pub fn is_parallel(self) -> bool {
        matches!(self, CoordKind::Parallel | CoordKind::PolarParallel)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxesBlock {
    pub coord: CoordKind,
    pub inset: f64,
    pub entries: Vec<AxisSpec>,
    /// JSON-pointer prefix of axis entries (`/axes` or `/axes/properties`).
    pub entry_path: String,
}

/// A default value filled in during parse.
#[derive(Debug, Clone, PartialEq)]
pub struct FilledDefault {
    pub path: String,
    pub value: String,
}

/// The validated, defaults-filled specification.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecTree {
    pub width: f64,
    pub height: f64,
    pub padding: f64,
    pub data: Vec<DataDef>,
    pub transforms: Vec<TransformStep>,
    pub scales: Vec<ScaleDef>,
    pub axes: AxesBlock,
    pub geoms: Vec<GeomSpec>,
    pub guides: Vec<GuideSpec>,
    pub defaults: Vec<FilledDefault>,
}

struct ParseCtx {
    defaults: Vec<FilledDefault>,
}

impl ParseCtx {
    fn filled(&mut self, path: impl Into<String>, value: impl std::fmt::Display) {
        self.defaults.push(FilledDefault { path: path.into(), value: value.to_string() });
    }
}

/// Builds the SpecTree. The input must have passed [`super::scan::scan`];
/// parse never produces diagnostics of its own.
pub fn parse(root: &Value) -> SpecTree {
    let mut ctx = ParseCtx { defaults: Vec::new() };
    let top = root.as_object().expect("scan guarantees an object root");

    let mut dim = |key: &str, default: f64| match top.get(key).and_then(Value::as_f64) {
        Some(v) => v,
        None => {
            ctx.filled(format!("/{key}"), default);
            default
        }
    };
    let width = dim("width", DEFAULT_WIDTH);
    let height = dim("height", DEFAULT_HEIGHT);
    let padding = dim("padding", DEFAULT_PADDING);

    let data = top
        .get("data")
        .and_then(Value::as_array)
        .map(|entries| entries.iter().map(parse_data_entry).collect())
        .unwrap_or_default();

    let transforms = top
        .get("transform")
        .and_then(Value::as_array)
        .map(|steps| steps.iter().map(parse_transform_step).collect())
        .unwrap_or_default();

    let scales = top
        .get("scales")
        .and_then(Value::as_array)
        .map(|scales| {
            scales
                .iter()
                .enumerate()
                .map(|(i, s)| parse_scale(s, i, &mut ctx))
                .collect()
        })
        .unwrap_or_default();

    let axes = parse_axes(top.get("axes"), &mut ctx);

    let geoms = top
        .get("geom")
        .and_then(Value::as_array)
        .map(|geoms| {
            geoms
                .iter()
                .enumerate()
                .map(|(i, g)| parse_geom(g, i, &mut ctx))
                .collect()
        })
        .unwrap_or_default();

    let guides = top
        .get("guides")
        .and_then(Value::as_array)
        .map(|guides| guides.iter().map(parse_guide).collect())
        .unwrap_or_default();

    SpecTree {
        width,
        height,
        padding,
        data,
        transforms,
        scales,
        axes,
        geoms,
        guides,
        defaults: ctx.defaults,
    }
}

fn parse_data_entry(entry: &Value) -> DataDef {
    let obj = entry.as_object().expect("scanned");
    let name = obj.get("name").and_then(Value::as_str).unwrap_or_default().to_string();
    let source = match obj.get("values") {
        Some(Value::String(path)) => DataSource::File(path.clone()),
        Some(inline) => DataSource::Inline(inline.clone()),
        None => DataSource::Inline(Value::Array(Vec::new())),
    };
    let format = match obj
        .get("format")
        .and_then(Value::as_object)
        .and_then(|f| f.get("type"))
        .and_then(Value::as_str)
    {
        Some("csv") => DataFormat::Csv,
        Some("tsv") => DataFormat::Tsv,
        Some("json") => DataFormat::Json,
        // infer from the file extension; inline values are json-shaped
        _ => match &source {
            DataSource::File(p) if p.ends_with(".tsv") => DataFormat::Tsv,
            DataSource::File(p) if p.ends_with(".json") => DataFormat::Json,
            DataSource::File(_) => DataFormat::Csv,
            DataSource::Inline(_) => DataFormat::Json,
        },
    };
    DataDef { name, source, format }
}

fn parse_transform_step(step: &Value) -> TransformStep {
    let obj = step.as_object().expect("scanned");
    let get = |key: &str| obj.get(key).and_then(Value::as_str).unwrap_or_default().to_string();
    let output = obj.get("name").and_then(Value::as_str).map(str::to_string);
    if let Some(f) = obj.get("function").and_then(Value::as_str) {
        return TransformStep::Function {
            function: f.to_string(),
            properties: obj
                .get("properties")
                .and_then(Value::as_object)
                .cloned()
                .unwrap_or_default(),
        };
    }
    match obj.get("type").and_then(Value::as_str).unwrap_or_default() {
        "filter" => TransformStep::Filter { data: get("data"), predicate: get("predicate"), output },
        "group" => TransformStep::Group {
            data: get("data"),
            keys: obj
                .get("keys")
                .and_then(Value::as_array)
                .map(|ks| ks.iter().filter_map(Value::as_str).map(str::to_string).collect())
                .unwrap_or_default(),
            aggregates: obj
                .get("aggregates")
                .and_then(Value::as_array)
                .map(|aggs| {
                    aggs.iter()
                        .filter_map(|a| {
                            let aobj = a.as_object()?;
                            Some(AggregateSpec {
                                field: aobj.get("field")?.as_str()?.to_string(),
                                stat: Stat::parse(
                                    aobj.get("stat")?.as_str()?,
                                    aobj.get("p").and_then(Value::as_f64),
                                )
                                .ok()?,
                                output: aobj.get("name")?.as_str()?.to_string(),
                            })
                        })
                        .collect()
                })
                .unwrap_or_default(),
            output,
        },
        "join" => TransformStep::Join {
            left: get("left"),
            right: get("right"),
            key: get("key"),
            side: match obj.get("side").and_then(Value::as_str) {
                Some("right") => JoinSide::Right,
                _ => JoinSide::Left,
            },
            output: get("name"),
        },
        "cross" => TransformStep::Cross { left: get("left"), right: get("right"), output: get("name") },
        _ => TransformStep::Nest {
            data: get("data"),
            x: get("x"),
            y: get("y"),
            fields: obj
                .get("fields")
                .and_then(Value::as_array)
                .map(|fs| fs.iter().filter_map(Value::as_str).map(str::to_string).collect())
                .unwrap_or_default(),
            output: get("name"),
        },
    }
}

fn parse_scale(scale: &Value, index: usize, ctx: &mut ParseCtx) -> ScaleDef {
    let obj = scale.as_object().expect("scanned");
    let name = obj.get("name").and_then(Value::as_str).unwrap_or_default().to_string();
    let kind = obj
        .get("type")
        .and_then(Value::as_str)
        .and_then(ScaleKind::parse)
        .unwrap_or(ScaleKind::Linear);
    let range = match obj.get("range").and_then(Value::as_object).and_then(|r| r.get("value")) {
        Some(Value::String(dim)) if dim == "width" => RangeSpec::Named(Dimension::Width),
        Some(Value::String(_)) => RangeSpec::Named(Dimension::Height),
        Some(Value::Array(items)) => {
            if items.len() == 2 && items.iter().all(Value::is_number) {
                RangeSpec::Pair(
                    items[0].as_f64().unwrap_or(0.0),
                    items[1].as_f64().unwrap_or(0.0),
                )
            } else {
                RangeSpec::Discrete(
                    items
                        .iter()
                        .map(|v| match v {
                            Value::Number(n) => RangeValue::Number(n.as_f64().unwrap_or(0.0)),
                            Value::String(s) => RangeValue::Text(normalize_color(s)),
                            _ => RangeValue::Number(0.0),
                        })
                        .collect(),
                )
            }
        }
        _ => {
            ctx.filled(format!("/scales/{index}/range"), "by consumer channel");
            RangeSpec::Default
        }
    };
    let domain = match obj.get("domain") {
        Some(Value::Object(d)) => DomainSpec::Reference {
            data: d.get("data").and_then(Value::as_str).unwrap_or_default().to_string(),
            field: d.get("field").and_then(Value::as_str).unwrap_or_default().to_string(),
        },
        Some(Value::Array(items)) => {
            if items.len() == 2 && items.iter().all(Value::is_number) && kind != ScaleKind::Ordinal
            {
                DomainSpec::Pair(
                    items[0].as_f64().unwrap_or(0.0),
                    items[1].as_f64().unwrap_or(0.0),
                )
            } else {
                DomainSpec::List(
                    items
                        .iter()
                        .map(|v| match v {
                            Value::Number(n) => {
                                DataValue::number(n.as_f64().unwrap_or(0.0)).unwrap_or(DataValue::Null)
                            }
                            Value::String(s) => DataValue::Text(s.clone()),
                            Value::Bool(b) => DataValue::Bool(*b),
                            _ => DataValue::Null,
                        })
                        .collect(),
                )
            }
        }
        _ => DomainSpec::Pair(0.0, 1.0),
    };
    let exponent = match obj.get("exponent").and_then(Value::as_f64) {
        Some(e) => e,
        None => {
            if kind == ScaleKind::Exp {
                ctx.filled(format!("/scales/{index}/exponent"), 1);
            }
            1.0
        }
    };
    let clamp = match obj.get("clamp").and_then(Value::as_bool) {
        Some(c) => c,
        None => {
            ctx.filled(format!("/scales/{index}/clamp"), false);
            false
        }
    };
    ScaleDef { name, kind, domain, range, exponent, clamp }
}

fn parse_axes(axes: Option<&Value>, ctx: &mut ParseCtx) -> AxesBlock {
    match axes {
        Some(Value::Array(entries)) => AxesBlock {
            coord: CoordKind::Cartesian,
            inset: 0.0,
            entries: entries
                .iter()
                .enumerate()
                .map(|(i, e)| parse_axis_entry(e, &format!("/axes/{i}"), ctx))
                .collect(),
            entry_path: "/axes".into(),
        },
        Some(Value::Object(obj)) => {
            let coord = match obj.get("type").and_then(Value::as_str) {
                Some("coord_equal") => CoordKind::Equal,
                Some("coord_flip") => CoordKind::Flip,
                Some("coord_polar") => CoordKind::Polar,
                Some("coord_parallel") => CoordKind::Parallel,
                Some("coord_polar_parallel") => CoordKind::PolarParallel,
                _ => CoordKind::Cartesian,
            };
            let inset = match obj.get("inset").and_then(Value::as_f64) {
                Some(v) => v,
                None => match coord {
                    CoordKind::PolarParallel => {
                        ctx.filled("/axes/inset", DEFAULT_POLAR_PARALLEL_INSET);
                        DEFAULT_POLAR_PARALLEL_INSET
                    }
                    _ => 0.0,
                },
            };
            AxesBlock {
                coord,
                inset,
                entries: obj
                    .get("properties")
                    .and_then(Value::as_array)
                    .map(|entries| {
                        entries
                            .iter()
                            .enumerate()
                            .map(|(i, e)| parse_axis_entry(e, &format!("/axes/properties/{i}"), ctx))
                            .collect()
                    })
                    .unwrap_or_default(),
                entry_path: "/axes/properties".into(),
            }
        }
        _ => AxesBlock {
            coord: CoordKind::Cartesian,
            inset: 0.0,
            entries: Vec::new(),
            entry_path: "/axes".into(),
        },
    }
}

fn color_of(obj: &serde_json::Map<String, Value>, default: &str) -> String {
    for key in ["colour", "color"] {
        if let Some(c) = obj.get(key).and_then(Value::as_str) {
            return normalize_color(c.trim());
        }
    }
    default.to_string()
}

fn parse_axis_entry(entry: &Value, path: &str, ctx: &mut ParseCtx) -> AxisSpec {
    let obj = entry.as_object().expect("scanned");
    let role = match obj.get("type").and_then(Value::as_str) {
        Some("y") => AxisRole::Y,
        _ => AxisRole::X,
    };
    let source = if let Some(scale) = obj.get("scale").and_then(Value::as_str) {
        AxisSource::Scale(scale.to_string())
    } else {
        AxisSource::Field {
            data: obj.get("data").and_then(Value::as_str).unwrap_or_default().to_string(),
            field: obj.get("field").and_then(Value::as_str).unwrap_or_default().to_string(),
        }
    };
    let orient = match obj.get("orient").and_then(Value::as_str).and_then(Orient::parse) {
        Some(o) => o,
        None => {
            ctx.filled(format!("{path}/orient"), "edge");
            Orient::Edge
        }
    };
    let grid = match obj.get("grid").and_then(Value::as_bool) {
        Some(g) => g,
        None => {
            ctx.filled(format!("{path}/grid"), false);
            false
        }
    };
    let ticks = match obj.get("ticks").and_then(Value::as_u64) {
        Some(t) => t as usize,
        None => {
            ctx.filled(format!("{path}/ticks"), DEFAULT_TICK_TARGET);
            DEFAULT_TICK_TARGET
        }
    };
    let text = match obj.get("text").and_then(Value::as_object) {
        Some(tobj) => TextStyle {
            font: tobj
                .get("font")
                .and_then(Value::as_str)
                .unwrap_or("10px sans-serif")
                .to_string(),
            color: color_of(tobj, "#000000"),
        },
        None => {
            ctx.filled(format!("{path}/text"), "10px sans-serif #000000");
            TextStyle::default()
        }
    };
    let annotation = obj.get("annotation").and_then(Value::as_object).map(|aobj| Annotation {
        title: aobj.get("title").and_then(Value::as_str).unwrap_or_default().to_string(),
        position: aobj
            .get("position")
            .and_then(Value::as_str)
            .unwrap_or("edge")
            .to_string(),
        font: aobj
            .get("font")
            .and_then(Value::as_str)
            .unwrap_or("10px sans-serif")
            .to_string(),
        color: color_of(aobj, "#000000"),
    });
    let transform = obj.get("transform").and_then(Value::as_object).and_then(|tobj| {
        let f = tobj.get("function").and_then(Value::as_str)?;
        let power = tobj
            .get("properties")
            .and_then(Value::as_object)
            .and_then(|p| p.get("power"))
            .and_then(Value::as_f64);
        VariableFn::parse(f, power).ok()
    });
    AxisSpec { role, source, orient, grid, ticks, text, annotation, transform }
}

fn parse_geom(geom: &Value, index: usize, ctx: &mut ParseCtx) -> GeomSpec {
    let obj = geom.as_object().expect("scanned");
    let kind = obj
        .get("type")
        .and_then(Value::as_str)
        .and_then(GeomKind::parse)
        .unwrap_or(GeomKind::Point);
    let data = obj.get("data").and_then(Value::as_str).unwrap_or_default().to_string();
    let mut bindings = BTreeMap::new();
    let mut bins = None;
    if let Some(props) = obj.get("properties").and_then(Value::as_object) {
        for (key, value) in props {
            if key == "bins" {
                bins = value.as_u64().map(|b| b as usize);
                continue;
            }
            let Some(channel) = Channel::parse(key) else { continue };
            let binding = match value {
                Value::String(s) => {
                    let color_channel = matches!(channel, Channel::Fill | Channel::Stroke);
                    if channel == Channel::Font || (color_channel && crate::compiler::scan::is_color(s)) {
                        BindingSpec::Const { value: ConstValue::Text(normalize_color(s)), scale: None }
                    } else {
                        BindingSpec::ScaleName(s.clone())
                    }
                }
                Value::Number(n) => BindingSpec::Const {
                    value: ConstValue::Number(n.as_f64().unwrap_or(0.0)),
                    scale: None,
                },
                Value::Object(b) => {
                    let scale = b.get("scale").and_then(Value::as_str).map(str::to_string);
                    if let Some(field) = b.get("field").and_then(Value::as_str) {
                        BindingSpec::Field { field: field.to_string(), scale }
                    } else {
                        let value = match b.get("value") {
                            Some(Value::Number(n)) => ConstValue::Number(n.as_f64().unwrap_or(0.0)),
                            Some(Value::String(s)) => ConstValue::Text(normalize_color(s)),
                            Some(Value::Bool(v)) => ConstValue::Text(v.to_string()),
                            _ => ConstValue::Number(0.0),
                        };
                        BindingSpec::Const { value, scale }
                    }
                }
                _ => continue,
            };
            bindings.insert(channel, binding);
        }
    }
    // the default color ledger entry: an unbound fill becomes palette 0
    if !bindings.contains_key(&Channel::Fill)
        && !matches!(kind, GeomKind::HLine | GeomKind::VLine | GeomKind::Line)
    {
        ctx.filled(format!("/geom/{index}/properties/fillColor"), crate::scene::PALETTE[0]);
    }
    GeomSpec { kind, data, bindings, bins }
}

fn parse_guide(guide: &Value) -> GuideSpec {
    let obj = guide.as_object().expect("scanned");
    let scale = obj
        .get("scale")
        .and_then(Value::as_str)
        .map(str::to_string)
        .or_else(|| obj.get("domain").and_then(Value::as_str).map(str::to_string))
        .or_else(|| {
            obj.get("domain")
                .and_then(Value::as_object)
                .and_then(|d| d.get("scale"))
                .and_then(Value::as_str)
                .map(str::to_string)
        })
        .unwrap_or_default();
    let props = obj.get("properties").and_then(Value::as_object);
    let title = props.and_then(|p| p.get("title")).and_then(|t| {
        t.as_str()
            .map(str::to_string)
            .or_else(|| t.as_object()?.get("name")?.as_str().map(str::to_string))
    });
    let position = props.and_then(|p| p.get("position")).and_then(Value::as_object).and_then(|p| {
        Some((p.get("x")?.as_f64()?, p.get("y")?.as_f64()?))
    });
    GuideSpec { scale, title, position }
}
