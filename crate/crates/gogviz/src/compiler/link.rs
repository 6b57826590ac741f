//! Link phase: resolves every cross-layer name reference to its provider,
//! checks that each connection is acceptable (an axis cannot link to a
//! color-range scale, an ordinal scale cannot feed a quantitative-only
//! channel, ...), and builds the dependency graph that fixes execution
//! order.

use crate::compiler::parse::{CoordKind, SpecTree};
use crate::datastore::DataRegistry;
use crate::diag::{Diagnostic, Phase};
use crate::geometry::{BindingSpec, Channel, GeomKind};
use crate::guides::AxisSource;
use crate::scales::{DomainSpec, RangeSpec, RangeValue, ScaleKind};
use crate::transform::TransformStep;
use std::collections::HashMap;

/// One layer instance in the dependency graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeId {
    Data(usize),
    Transform(usize),
    Scale(usize),
    Frame,
    Axis(usize),
    Geom(usize),
    Guide(usize),
    /// A dataset provided by the caller's registry, not the spec.
    External(String),
}

/// The link graph: nodes plus (dependent, dependency) edges. Acyclic by
/// construction, since layers only reference lower layers.
#[derive(Debug, Clone, Default)]
pub struct LinkGraph {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<(NodeId, NodeId)>,
    /// Scale indices whose domains fix the equal-aspect data extents,
    /// when the coord is `coord_equal`.
    pub equal_domain_scales: Option<(usize, usize)>,
}

fn quantitative(kind: ScaleKind) -> bool {
    matches!(kind, ScaleKind::Linear | ScaleKind::Log | ScaleKind::Exp)
}

struct Linker<'a> {
    tree: &'a SpecTree,
    diags: Vec<Diagnostic>,
    graph: LinkGraph,
    /// dataset name -> current producer node
    producers: HashMap<String, NodeId>,
    /// scale name -> index
    scales: HashMap<String, usize>,
    scale_used: Vec<bool>,
}

impl<'a> Linker<'a> {
    fn error(&mut self, path: String, message: impl Into<String>) {
        self.diags.push(Diagnostic::error(Phase::Link, path, message));
    }

    fn warning(&mut self, path: String, message: impl Into<String>) {
        self.diags.push(Diagnostic::warning(Phase::Link, path, message));
    }

    fn edge(&mut self, from: NodeId, to: NodeId) {
        self.graph.edges.push((from, to));
    }

    fn dataset_edge(&mut self, from: NodeId, name: &str, path: String) {
        match self.producers.get(name) {
            Some(node) => {
                let node = node.clone();
                self.edge(from, node);
            }
            None => self.error(path, format!("unknown dataset {name:?}")),
        }
    }

    /// Resolves a scale reference; marks it used and adds the edge.
    fn scale_edge(&mut self, from: NodeId, name: &str, path: String) -> Option<usize> {
        match self.scales.get(name).copied() {
            Some(idx) => {
                self.scale_used[idx] = true;
                self.edge(from, NodeId::Scale(idx));
                Some(idx)
            }
            None => {
                self.error(path, format!("unknown scale {name:?}"));
                None
            }
        }
    }
}

/// Runs the link phase over a parsed tree. `base` supplies datasets that
/// exist outside the spec (the registry snapshot the compilation runs on).
pub fn link(tree: &SpecTree, base: &DataRegistry) -> (LinkGraph, Vec<Diagnostic>) {
    let mut l = Linker {
        tree,
        diags: Vec::new(),
        graph: LinkGraph::default(),
        producers: HashMap::new(),
        scales: HashMap::new(),
        scale_used: vec![false; tree.scales.len()],
    };

    for name in base.names() {
        l.producers.insert(name.to_string(), NodeId::External(name.to_string()));
    }
    for (i, d) in tree.data.iter().enumerate() {
        l.graph.nodes.push(NodeId::Data(i));
        if l.producers.contains_key(&d.name) {
            l.error(format!("/data/{i}/name"), format!("dataset {:?} already exists", d.name));
        }
        l.producers.insert(d.name.clone(), NodeId::Data(i));
    }

    link_transforms(&mut l);
    link_scales(&mut l);
    l.graph.nodes.push(NodeId::Frame);
    link_axes(&mut l);
    link_geoms(&mut l);
    link_guides(&mut l);

    for (i, used) in l.scale_used.clone().iter().enumerate() {
        if !used {
            l.warning(
                format!("/scales/{i}"),
                format!("scale {:?} is declared but never used", tree.scales[i].name),
            );
        }
    }

    (l.graph, l.diags)
}

fn link_transforms(l: &mut Linker) {
    for (i, step) in l.tree.transforms.iter().enumerate() {
        let node = NodeId::Transform(i);
        l.graph.nodes.push(node.clone());
        let path = format!("/transform/{i}");
        let create = |l: &mut Linker, name: &str, path: String| {
            if l.producers.contains_key(name) {
                l.error(path, format!("output dataset {name:?} collides with an existing dataset"));
            }
            l.producers.insert(name.to_string(), node.clone());
        };
        match step {
            TransformStep::Filter { data, output, .. }
            | TransformStep::Group { data, output, .. } => {
                l.dataset_edge(node.clone(), data, format!("{path}/data"));
                match output {
                    Some(name) if name != data => create(l, name, format!("{path}/name")),
                    _ => {
                        l.producers.insert(data.clone(), node.clone());
                    }
                }
            }
            TransformStep::Join { left, right, output, .. } => {
                l.dataset_edge(node.clone(), left, format!("{path}/left"));
                l.dataset_edge(node.clone(), right, format!("{path}/right"));
                create(l, output, format!("{path}/name"));
            }
            TransformStep::Cross { left, right, output } => {
                l.dataset_edge(node.clone(), left, format!("{path}/left"));
                l.dataset_edge(node.clone(), right, format!("{path}/right"));
                create(l, output, format!("{path}/name"));
            }
            TransformStep::Nest { data, output, .. } => {
                l.dataset_edge(node.clone(), data, format!("{path}/data"));
                create(l, output, format!("{path}/name"));
            }
            TransformStep::Function { function, properties } => {
                let name = properties.get("name").and_then(|v| v.as_str()).unwrap_or_default();
                match function.as_str() {
                    "fibonacci" | "linspace" => {
                        create(l, name, format!("{path}/properties/name"));
                    }
                    _ => {
                        // variable function: consumes data, appends a column
                        if let Some(data) = properties.get("data").and_then(|v| v.as_str()) {
                            l.dataset_edge(node.clone(), data, format!("{path}/properties/data"));
                            match properties.get("output").and_then(|v| v.as_str()) {
                                Some(out) if out != data => create(l, out, format!("{path}/properties/output")),
                                _ => {
                                    l.producers.insert(data.to_string(), node.clone());
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

fn link_scales(l: &mut Linker) {
    for (i, scale) in l.tree.scales.iter().enumerate() {
        l.graph.nodes.push(NodeId::Scale(i));
        l.scales.insert(scale.name.clone(), i);
        if let DomainSpec::Reference { data, .. } = &scale.domain {
            l.dataset_edge(NodeId::Scale(i), data, format!("/scales/{i}/domain/data"));
        }
        if scale.kind == ScaleKind::Quantile && !matches!(scale.range, RangeSpec::Discrete(_)) {
            l.error(
                format!("/scales/{i}"),
                "quantile scale needs an explicit discrete range (its bucket count)",
            );
        }
    }
}

fn link_axes(l: &mut Linker) {
    let parallel = l.tree.axes.coord.is_parallel();
    let mut parallel_dataset: Option<String> = None;
    for (i, axis) in l.tree.axes.entries.iter().enumerate() {
        let node = NodeId::Axis(i);
        l.graph.nodes.push(node.clone());
        l.edge(node.clone(), NodeId::Frame);
        let path = format!("{}/{i}", l.tree.axes.entry_path);
        let dataset: Option<String> = match &axis.source {
            AxisSource::Scale(name) => {
                let idx = l.scale_edge(node.clone(), name, format!("{path}/scale"));
                if let Some(idx) = idx {
                    let def = &l.tree.scales[idx];
                    if matches!(def.range, RangeSpec::Discrete(_)) {
                        l.error(
                            format!("{path}/scale"),
                            format!(
                                "axis cannot link to scale {name:?}: its discrete range is not spatial"
                            ),
                        );
                    }
                    match &def.domain {
                        DomainSpec::Reference { data, .. } => Some(data.clone()),
                        _ if parallel => {
                            l.error(
                                format!("{path}/scale"),
                                "a parallel axis needs a scale with a (data, field) domain",
                            );
                            None
                        }
                        _ => None,
                    }
                } else {
                    None
                }
            }
            AxisSource::Field { data, field: _ } => {
                l.dataset_edge(node.clone(), data, format!("{path}/data"));
                Some(data.clone())
            }
        };
        if parallel {
            match (&parallel_dataset, dataset) {
                (None, Some(d)) => parallel_dataset = Some(d),
                (Some(first), Some(d)) if *first != d => {
                    l.error(
                        path,
                        format!("parallel axes must share one dataset ({first:?} vs {d:?})"),
                    );
                }
                _ => {}
            }
        }
    }
}

fn link_geoms(l: &mut Linker) {
    let coord = l.tree.axes.coord;
    let mut equal_scales: Option<(usize, usize)> = None;
    for (i, geom) in l.tree.geoms.iter().enumerate() {
        let node = NodeId::Geom(i);
        l.graph.nodes.push(node.clone());
        l.edge(node.clone(), NodeId::Frame);
        let path = format!("/geom/{i}");
        if coord.is_parallel() {
            l.error(
                path.clone(),
                "geometries are not placeable under parallel coordinates; records are drawn from the axes",
            );
            continue;
        }
        if matches!(
            geom.kind,
            GeomKind::Bar | GeomKind::VerticalBar | GeomKind::StackedBar
        ) && coord == CoordKind::Polar
        {
            l.error(path.clone(), "bar geometries are not placeable under polar coordinates");
        }
        l.dataset_edge(node.clone(), &geom.data, format!("{path}/data"));

        let mut xy_scale: [Option<usize>; 2] = [None, None];
        for (channel, binding) in &geom.bindings {
            let bpath = format!("{path}/properties/{}", channel_key(*channel));
            let scale_name = match binding {
                BindingSpec::ScaleName(s) => Some((s, true)),
                BindingSpec::Field { scale: Some(s), .. } => Some((s, false)),
                BindingSpec::Const { scale: Some(s), .. } => Some((s, false)),
                _ => None,
            };
            let Some((name, needs_field)) = scale_name else { continue };
            let Some(idx) = l.scale_edge(node.clone(), name, bpath.clone()) else { continue };
            let def = l.tree.scales[idx].clone();
            if needs_field && !matches!(def.domain, DomainSpec::Reference { .. }) {
                l.error(
                    bpath.clone(),
                    format!(
                        "scale {name:?} has an explicit domain with no field; bind this channel as {{field, scale}}"
                    ),
                );
            }
            check_channel_acceptability(l, *channel, idx, &bpath);
            match channel {
                Channel::X => xy_scale[0] = Some(idx),
                Channel::Y => xy_scale[1] = Some(idx),
                _ => {}
            }
        }

        // bar-specific link rules
        if matches!(geom.kind, GeomKind::Bar | GeomKind::VerticalBar | GeomKind::StackedBar) {
            if let Some(xi) = xy_scale[0] {
                if l.tree.scales[xi].kind != ScaleKind::Ordinal {
                    l.error(
                        format!("{path}/properties/x"),
                        "bar position needs an ordinal scale",
                    );
                }
            }
            if let Some(yi) = xy_scale[1] {
                if !quantitative(l.tree.scales[yi].kind) {
                    l.error(
                        format!("{path}/properties/y"),
                        "bar length needs a quantitative scale",
                    );
                }
            }
        }

        if coord == CoordKind::Equal && equal_scales.is_none() {
            if let (Some(x), Some(y)) = (xy_scale[0], xy_scale[1]) {
                if quantitative(l.tree.scales[x].kind) && quantitative(l.tree.scales[y].kind) {
                    equal_scales = Some((x, y));
                    l.edge(NodeId::Frame, NodeId::Scale(x));
                    l.edge(NodeId::Frame, NodeId::Scale(y));
                }
            }
        }
    }
    if coord == CoordKind::Equal {
        if equal_scales.is_none() {
            l.error(
                "/axes/type".into(),
                "coord_equal needs a geometry with quantitative scale-bound x and y channels",
            );
        }
        l.graph.equal_domain_scales = equal_scales;
    }
}

fn check_channel_acceptability(l: &mut Linker, channel: Channel, idx: usize, path: &str) {
    let def = &l.tree.scales[idx];
    let kind = def.kind;
    let name = def.name.clone();
    let discrete_text = match &def.range {
        RangeSpec::Discrete(values) => {
            if values.iter().all(|v| matches!(v, RangeValue::Text(_))) {
                Some(true)
            } else {
                Some(false)
            }
        }
        _ => None,
    };
    match channel {
        Channel::X | Channel::Y | Channel::Y2 => {
            if discrete_text == Some(true) {
                l.error(
                    path.to_string(),
                    format!("scale {name:?} has a color/shape range and cannot drive a position channel"),
                );
            }
        }
        Channel::Fill | Channel::Stroke => {
            if quantitative(kind) {
                l.error(
                    path.to_string(),
                    format!("scale {name:?} is continuous; color channels need an ordinal or quantile scale"),
                );
            } else if discrete_text == Some(false) {
                l.error(
                    path.to_string(),
                    format!("scale {name:?} has a numeric range; color channels need colors"),
                );
            } else if discrete_text.is_none() && !matches!(def.range, RangeSpec::Default) {
                l.error(
                    path.to_string(),
                    format!("scale {name:?} has a continuous range; color channels need a discrete color list"),
                );
            }
        }
        Channel::Shape => {
            if kind != ScaleKind::Ordinal {
                l.error(path.to_string(), "the shape channel needs an ordinal scale");
            }
        }
        Channel::Size
        | Channel::InnerRadius
        | Channel::OuterRadius
        | Channel::StartAngle
        | Channel::EndAngle => {
            if kind == ScaleKind::Ordinal {
                l.error(
                    path.to_string(),
                    format!("ordinal scale {name:?} may not feed the quantitative-only {channel:?} channel"),
                );
            } else if matches!(def.range, RangeSpec::Default) {
                l.error(
                    path.to_string(),
                    format!("scale {name:?} needs an explicit numeric range for the {channel:?} channel"),
                );
            }
        }
        Channel::Value | Channel::Group | Channel::Label | Channel::Font => {
            l.error(
                path.to_string(),
                format!("the {channel:?} channel takes a field or constant, not a scale"),
            );
        }
    }
}

fn link_guides(l: &mut Linker) {
    for (i, guide) in l.tree.guides.iter().enumerate() {
        let node = NodeId::Guide(i);
        l.graph.nodes.push(node.clone());
        let path = format!("/guides/{i}");
        let Some(idx) = l.scale_edge(node, &guide.scale, path.clone()) else { continue };
        let def = &l.tree.scales[idx];
        let legal = matches!(
            (def.kind, &def.range),
            (ScaleKind::Ordinal, RangeSpec::Discrete(_) | RangeSpec::Default)
                | (ScaleKind::Quantile, RangeSpec::Discrete(_))
        );
        if !legal {
            l.error(
                path,
                format!(
                    "legend cannot link to scale {:?}: legends need a discrete range (ordinal or quantile scale)",
                    def.name
                ),
            );
        }
    }
}

fn channel_key(c: Channel) -> &'static str {
    match c {
        Channel::X => "x",
        Channel::Y => "y",
        Channel::Y2 => "y2",
        Channel::Fill => "fillColor",
        Channel::Stroke => "strokeColor",
        Channel::Size => "size",
        Channel::Shape => "shape",
        Channel::Label => "text",
        Channel::InnerRadius => "innerRadius",
        Channel::OuterRadius => "outerRadius",
        Channel::StartAngle => "startAngle",
        Channel::EndAngle => "endAngle",
        Channel::Value => "value",
        Channel::Group => "group",
        Channel::Font => "font",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::parse::parse;
    use crate::diag::has_errors;

    fn run(spec: &str) -> (LinkGraph, Vec<Diagnostic>) {
        let tree = parse(&serde_json::from_str(spec).unwrap());
        link(&tree, &DataRegistry::new())
    }

    const BASE: &str = r#""data": [{"name": "pts", "values": [{"x": 1, "y": 2, "c": "a"}]}]"#;

    #[test]
    fn geom_scale_edge_exists() {
        let (graph, diags) = run(&format!(
            r#"{{{BASE},
                "scales": [{{"name": "xs", "type": "linear",
                             "range": {{"type": "range", "value": "width"}},
                             "domain": {{"data": "pts", "field": "x"}}}},
                           {{"name": "ys", "type": "linear",
                             "range": {{"type": "range", "value": "height"}},
                             "domain": {{"data": "pts", "field": "y"}}}}],
                "geom": [{{"type": "Point", "data": "pts",
                           "properties": {{"x": "xs", "y": "ys"}}}}]}}"#
        ));
        assert!(!has_errors(&diags), "{diags:?}");
        assert!(graph
            .edges
            .contains(&(NodeId::Geom(0), NodeId::Scale(0))));
    }

    #[test]
    fn dangling_axis_scale() {
        let (_, diags) = run(&format!(
            r#"{{{BASE}, "axes": [{{"type": "y", "scale": "zscale"}}]}}"#
        ));
        let err = diags.iter().find(|d| d.is_error()).unwrap();
        assert_eq!(err.path, "/axes/0/scale");
        assert!(err.message.contains("unknown scale"));
    }

    #[test]
    fn color_scale_as_axis_rejected() {
        let (_, diags) = run(&format!(
            r##"{{{BASE},
                "scales": [{{"name": "cs", "type": "ordinal",
                             "range": {{"type": "range", "value": ["#111111", "#222222"]}},
                             "domain": {{"data": "pts", "field": "c"}}}}],
                "axes": [{{"type": "y", "scale": "cs"}}]}}"##
        ));
        assert!(diags
            .iter()
            .any(|d| d.is_error() && d.message.contains("not spatial")));
    }

    #[test]
    fn continuous_color_rejected() {
        let (_, diags) = run(&format!(
            r#"{{{BASE},
                "scales": [{{"name": "xs", "type": "linear",
                             "range": {{"type": "range", "value": "width"}},
                             "domain": {{"data": "pts", "field": "x"}}}}],
                "geom": [{{"type": "Point", "data": "pts",
                           "properties": {{"x": {{"field": "x"}}, "y": {{"field": "y"}},
                                           "fillColor": "xs"}}}}]}}"#
        ));
        assert!(diags
            .iter()
            .any(|d| d.is_error() && d.message.contains("ordinal or quantile")));
    }

    #[test]
    fn ordinal_on_quantitative_channel_rejected() {
        let (_, diags) = run(&format!(
            r#"{{{BASE},
                "scales": [{{"name": "os", "type": "ordinal",
                             "range": {{"type": "range", "value": [0, 1]}},
                             "domain": {{"data": "pts", "field": "c"}}}}],
                "geom": [{{"type": "Pie", "data": "pts",
                           "properties": {{"value": {{"field": "x"}},
                                           "outerRadius": {{"field": "y", "scale": "os"}}}}}}]}}"#
        ));
        assert!(diags
            .iter()
            .any(|d| d.is_error() && d.message.contains("quantitative-only")));
    }

    #[test]
    fn unused_scale_warns() {
        let (_, diags) = run(&format!(
            r#"{{{BASE},
                "scales": [{{"name": "xs", "type": "linear",
                             "range": {{"type": "range", "value": [0, 330]}},
                             "domain": {{"data": "pts", "field": "x"}}}}]}}"#
        ));
        assert!(diags
            .iter()
            .any(|d| !d.is_error() && d.path == "/scales/0" && d.message.contains("never used")));
    }

    #[test]
    fn unknown_dataset_in_scale_domain() {
        let (_, diags) = run(&format!(
            r#"{{{BASE},
                "scales": [{{"name": "xs", "type": "linear",
                             "range": {{"type": "range", "value": [0, 1]}},
                             "domain": {{"data": "nope", "field": "x"}}}}]}}"#
        ));
        assert!(diags
            .iter()
            .any(|d| d.is_error() && d.path == "/scales/0/domain/data"));
    }

    #[test]
    fn transform_chain_and_collision() {
        let (graph, diags) = run(&format!(
            r#"{{{BASE},
                "transform": [
                    {{"type": "filter", "data": "pts", "predicate": "x > 0", "name": "f1"}},
                    {{"type": "filter", "data": "f1", "predicate": "x > 1", "name": "pts"}}
                ]}}"#
        ));
        assert!(diags.iter().any(|d| d.is_error() && d.message.contains("collides")));
        assert!(graph.edges.contains(&(NodeId::Transform(1), NodeId::Transform(0))));
    }

    #[test]
    fn geoms_under_parallel_rejected() {
        let (_, diags) = run(&format!(
            r#"{{{BASE},
                "axes": {{"type": "coord_parallel", "properties": [
                    {{"type": "y", "data": "pts", "field": "x"}},
                    {{"type": "y", "data": "pts", "field": "y"}}
                ]}},
                "geom": [{{"type": "Point", "data": "pts",
                           "properties": {{"x": {{"field": "x"}}, "y": {{"field": "y"}}}}}}]}}"#
        ));
        assert!(diags
            .iter()
            .any(|d| d.is_error() && d.path == "/geom/0" && d.message.contains("parallel")));
    }
}
