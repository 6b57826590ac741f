//! Assemble phase: executes the linked layers in dependency order — data
//! loads, transforms, scale resolution, coordinate frame, axes, geometries,
//! guides — concatenating their render commands in that z-order.
//!
//! Within a stage, independent items all run and report their own errors;
//! a stage with errors stops the pipeline (later stages would only cascade).

use crate::compiler::link::LinkGraph;
use crate::compiler::parse::{CoordKind, DataFormat, DataSource, SpecTree};
use crate::compiler::SourceResolver;
use crate::coords::{parallel_axis_positions, polyline_for_record, CoordSystem, PlotFrame};
use crate::datastore::{self, DataRegistry, DataTable};
use crate::diag::{Diagnostic, Phase};
use crate::geometry::{
    render_geom, BindingSpec, Channel, ConstValue, GeomInput, ResolvedBinding,
};
use crate::guides::{
    render_axis, render_legend, render_parallel_axis, AxisRender, AxisSource, AxisSpec,
};
use crate::scales::{
    resolve_domain, Dimension, DomainSpec, RangeSpec, RangeValue, ResolvedDomain, ResolvedScale,
    ScaleKind,
};
use crate::scene::{palette_color, RenderCommand, SceneGraph, Style, PALETTE};
use crate::transform::{execute_step, VariableFn};
use crate::value::{ColumnType, DataValue};
use std::collections::{HashMap, HashSet};

/// What a scale feeds; decides how named and default ranges resolve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    PosX,
    PosY,
    Color,
    Shape,
    SizeLike,
    Legend,
}

fn channel_role(c: Channel) -> Role {
    match c {
        Channel::X => Role::PosX,
        Channel::Y | Channel::Y2 => Role::PosY,
        Channel::Fill | Channel::Stroke => Role::Color,
        Channel::Shape => Role::Shape,
        _ => Role::SizeLike,
    }
}

struct Assembler<'a> {
    tree: &'a SpecTree,
    graph: &'a LinkGraph,
    resolver: &'a dyn SourceResolver,
    working: DataRegistry,
    diags: Vec<Diagnostic>,
    frame: PlotFrame,
    coord: Option<CoordSystem>,
    domains: Vec<Option<ResolvedDomain>>,
    scale_index: HashMap<String, usize>,
    /// scales already warned about degenerate-domain widening
    widen_warned: HashSet<usize>,
    order: Vec<String>,
}

impl<'a> Assembler<'a> {
    fn error(&mut self, path: String, message: impl Into<String>) {
        self.diags.push(Diagnostic::error(Phase::Assemble, path, message));
    }

    fn warn_all(&mut self, path: &str, warnings: Vec<String>) {
        for w in warnings {
            self.diags.push(Diagnostic::warning(Phase::Assemble, path.to_string(), w));
        }
    }

    fn has_errors(&self) -> bool {
        self.diags.iter().any(Diagnostic::is_error)
    }
}

/// Runs the assemble phase. Returns the scene (when no stage erred) plus
/// every diagnostic gathered.
pub fn assemble(
    tree: &SpecTree,
    graph: &LinkGraph,
    base: &DataRegistry,
    resolver: &dyn SourceResolver,
) -> (Option<SceneGraph>, Vec<Diagnostic>) {
    let frame = PlotFrame::new(tree.width, tree.height, tree.padding);
    let mut a = Assembler {
        tree,
        graph,
        resolver,
        working: base.snapshot(),
        diags: Vec::new(),
        frame,
        coord: None,
        domains: vec![None; tree.scales.len()],
        scale_index: tree
            .scales
            .iter()
            .enumerate()
            .map(|(i, s)| (s.name.clone(), i))
            .collect(),
        widen_warned: HashSet::new(),
        order: Vec::new(),
    };

    a.load_data();
    if a.has_errors() {
        return (None, a.diags);
    }
    a.run_transforms();
    if a.has_errors() {
        return (None, a.diags);
    }
    a.resolve_scale_domains();
    if a.has_errors() {
        return (None, a.diags);
    }
    a.build_coord();
    if a.has_errors() {
        return (None, a.diags);
    }

    let mut scene = SceneGraph::new(a.frame);
    a.render_axes(&mut scene);
    if a.has_errors() {
        return (None, a.diags);
    }
    a.render_geoms(&mut scene);
    if a.has_errors() {
        return (None, a.diags);
    }
    a.render_guides(&mut scene);
    if a.has_errors() {
        return (None, a.diags);
    }
    scene.execution_order = a.order;
    (Some(scene), a.diags)
}

impl<'a> Assembler<'a> {
    fn load_data(&mut self) {
        for (i, def) in self.tree.data.iter().enumerate() {
            let path = format!("/data/{i}/values");
            let mut warnings = Vec::new();
            let result = match &def.source {
                DataSource::File(file) => match self.resolver.load(file) {
                    Ok(bytes) => match def.format {
                        DataFormat::Csv => datastore::load_csv(&bytes, &def.name, &mut warnings),
                        DataFormat::Tsv => datastore::load_tsv(&bytes, &def.name, &mut warnings),
                        DataFormat::Json => datastore::load_json(&bytes, &def.name, &mut warnings),
                    },
                    Err(e) => {
                        self.error(path.clone(), format!("cannot load {file:?}: {e}"));
                        continue;
                    }
                },
                DataSource::Inline(value) => {
                    datastore::load_json_value(value, &def.name, &mut warnings)
                }
            };
            self.warn_all(&path, warnings);
            match result {
                Ok(table) => match self.working.create(table) {
                    Ok(()) => self.order.push(format!("data:{}", def.name)),
                    Err(e) => self.error(format!("/data/{i}/name"), e.to_string()),
                },
                Err(e) => self.error(path, e.to_string()),
            }
        }
    }

    fn run_transforms(&mut self) {
        for (i, step) in self.tree.transforms.iter().enumerate() {
            let path = format!("/transform/{i}");
            let mut warnings = Vec::new();
            match execute_step(step, &mut self.working, &mut warnings) {
                Ok(()) => {
                    self.warn_all(&path, warnings);
                    self.order.push(format!("transform:{i}"));
                }
                Err(e) => {
                    self.warn_all(&path, warnings);
                    self.error(path, e.to_string());
                    return; // later steps depend on earlier outputs
                }
            }
        }
    }

    fn resolve_scale_domains(&mut self) {
        for (i, def) in self.tree.scales.iter().enumerate() {
            match resolve_domain(def, &self.working) {
                Ok(domain) => {
                    self.domains[i] = Some(domain);
                    self.order.push(format!("scale:{}", def.name));
                }
                Err(e) => self.error(format!("/scales/{i}/domain"), e.to_string()),
            }
        }
    }

    /// Transformed-space span of a quantitative scale's interval domain,
    /// used by the equal-aspect coordinate system.
    fn transformed_span(&mut self, idx: usize) -> Option<f64> {
        let def = &self.tree.scales[idx];
        let Some(ResolvedDomain::Interval(mut d0, mut d1)) = self.domains[idx].clone() else {
            return None;
        };
        if d0 == d1 {
            d0 -= 0.5;
            d1 += 0.5;
        }
        let span = match def.kind {
            ScaleKind::Linear => d1 - d0,
            ScaleKind::Log => {
                if d0 <= 0.0 {
                    self.error(
                        format!("/scales/{idx}/domain"),
                        "log scale requires a positive domain",
                    );
                    return None;
                }
                d1.ln() - d0.ln()
            }
            ScaleKind::Exp => d1.powf(def.exponent) - d0.powf(def.exponent),
            _ => return None,
        };
        Some(span)
    }

    fn build_coord(&mut self) {
        let frame = self.frame;
        let coord = match self.tree.axes.coord {
            CoordKind::Cartesian => CoordSystem::Cartesian { frame },
            CoordKind::Flip => CoordSystem::Flip { frame },
            CoordKind::Polar => CoordSystem::Polar { frame, inset: self.tree.axes.inset },
            CoordKind::Parallel => {
                CoordSystem::Parallel { frame, axes: self.tree.axes.entries.len() }
            }
            CoordKind::PolarParallel => CoordSystem::PolarParallel {
                frame,
                axes: self.tree.axes.entries.len(),
                inset: self.tree.axes.inset,
            },
            CoordKind::Equal => {
                let Some((xi, yi)) = self.graph.equal_domain_scales else {
                    self.error("/axes".into(), "coord_equal is missing its domain scales");
                    return;
                };
                let (Some(w), Some(h)) = (self.transformed_span(xi), self.transformed_span(yi))
                else {
                    return;
                };
                CoordSystem::Equal { frame, domain_w: w, domain_h: h }
            }
        };
        self.coord = Some(coord);
        self.order.push("frame".to_string());
    }

    /// Resolves a numeric positional range for a role under the active
    /// coordinate system.
    fn positional_range(&self, role: Role, named: Option<Dimension>) -> (f64, f64) {
        let f = &self.frame;
        match self.tree.axes.coord {
            CoordKind::Polar | CoordKind::Parallel | CoordKind::PolarParallel => (0.0, 1.0),
            CoordKind::Flip => match (named, role) {
                (Some(Dimension::Width), _) | (None, Role::PosX) => (0.0, f.inner_height()),
                _ => (0.0, f.inner_width()),
            },
            _ => match (named, role) {
                (Some(Dimension::Width), _) | (None, Role::PosX) => (0.0, f.inner_width()),
                _ => (0.0, f.inner_height()),
            },
        }
    }

    /// Builds the resolved scale for one consumer role. Degenerate domains
    /// widen with a warning emitted once per scale.
    fn resolve_scale(
        &mut self,
        idx: usize,
        role: Role,
        path: &str,
    ) -> Option<ResolvedScale> {
        let def = self.tree.scales[idx].clone();
        let domain = self.domains[idx].clone()?;
        let mut warnings = Vec::new();
        let result = self.resolve_scale_inner(idx, &def, domain, role, &mut warnings);
        if !warnings.is_empty() && self.widen_warned.insert(idx) {
            self.warn_all(path, warnings);
        }
        match result {
            Ok(scale) => Some(scale),
            Err(msg) => {
                self.error(path.to_string(), msg);
                None
            }
        }
    }

    fn resolve_scale_inner(
        &mut self,
        idx: usize,
        def: &crate::scales::ScaleDef,
        domain: ResolvedDomain,
        role: Role,
        warnings: &mut Vec<String>,
    ) -> Result<ResolvedScale, String> {
        let positional = matches!(role, Role::PosX | Role::PosY);
        match (def.kind, domain) {
            (ScaleKind::Linear | ScaleKind::Log | ScaleKind::Exp, ResolvedDomain::Interval(d0, d1)) => {
                let range = if positional && self.tree.axes.coord == CoordKind::Equal {
                    let span = self
                        .transformed_span(idx)
                        .ok_or_else(|| "cannot compute equal-aspect span".to_string())?;
                    (0.0, span)
                } else if positional
                    && matches!(self.tree.axes.coord, CoordKind::Polar | CoordKind::Parallel | CoordKind::PolarParallel)
                {
                    (0.0, 1.0)
                } else {
                    match &def.range {
                        RangeSpec::Pair(r0, r1) => (*r0, *r1),
                        RangeSpec::Named(dim) => self.positional_range(role, Some(*dim)),
                        RangeSpec::Default => self.positional_range(role, None),
                        RangeSpec::Discrete(_) => {
                            return Err(format!(
                                "scale {:?} has a discrete range but a continuous kind",
                                def.name
                            ))
                        }
                    }
                };
                ResolvedScale::quantitative(def.kind, (d0, d1), range, def.exponent, def.clamp, warnings)
                    .map_err(|e| e.to_string())
            }
            (ScaleKind::Ordinal, ResolvedDomain::Categories(domain)) => match (&def.range, role) {
                (RangeSpec::Discrete(values), _) => Ok(ResolvedScale::OrdinalDiscrete {
                    domain,
                    range: values.clone(),
                }),
                (RangeSpec::Default, Role::Color | Role::Legend) => Ok(ResolvedScale::OrdinalDiscrete {
                    domain,
                    range: PALETTE.iter().map(|c| RangeValue::Text(c.to_string())).collect(),
                }),
                (RangeSpec::Default, Role::Shape) => Ok(ResolvedScale::OrdinalDiscrete {
                    domain,
                    range: crate::geometry::SHAPES
                        .iter()
                        .map(|s| RangeValue::Text(s.to_string()))
                        .collect(),
                }),
                (RangeSpec::Pair(r0, r1), _) => Ok(ResolvedScale::OrdinalBand {
                    domain,
                    range: (*r0, *r1),
                }),
                (RangeSpec::Named(dim), _) => Ok(ResolvedScale::OrdinalBand {
                    domain,
                    range: self.positional_range(role, Some(*dim)),
                }),
                (RangeSpec::Default, _) => {
                    if self.tree.axes.coord == CoordKind::Equal && positional {
                        return Err("ordinal position scales are not supported under coord_equal".into());
                    }
                    Ok(ResolvedScale::OrdinalBand {
                        domain,
                        range: self.positional_range(role, None),
                    })
                }
            },
            (ScaleKind::Quantile, ResolvedDomain::Sample(sample)) => match &def.range {
                RangeSpec::Discrete(values) => Ok(ResolvedScale::Quantile {
                    sample,
                    range: values.clone(),
                }),
                _ => Err(format!(
                    "quantile scale {:?} needs an explicit discrete range",
                    def.name
                )),
            },
            (kind, domain) => Err(format!(
                "scale {:?}: kind {kind:?} cannot use domain {domain:?}",
                def.name
            )),
        }
    }

    fn coord(&self) -> CoordSystem {
        self.coord.clone().expect("coord built before rendering")
    }

    fn render_axes(&mut self, scene: &mut SceneGraph) {
        if self.tree.axes.coord.is_parallel() {
            self.render_parallel(scene);
            return;
        }
        let coord = self.coord();
        for (i, axis) in self.tree.axes.entries.iter().cloned().enumerate() {
            let path = format!("{}/{i}", self.tree.axes.entry_path);
            let Some(scale) = self.axis_scale(&axis, &path) else { continue };
            let input = AxisRender {
                role: axis.role,
                scale: &scale,
                orient: axis.orient,
                grid: axis.grid,
                ticks: axis.ticks,
                text: &axis.text,
                annotation: axis.annotation.as_ref(),
                coords: &coord,
            };
            match render_axis(&input) {
                Ok(commands) => {
                    scene.commands.extend(commands);
                    self.order.push(format!("axis:{i}"));
                }
                Err(e) => self.error(path, e.to_string()),
            }
        }
    }

    /// The resolved scale an axis draws: its named scale, or a default
    /// scale over its (data, field) reference.
    fn axis_scale(&mut self, axis: &AxisSpec, path: &str) -> Option<ResolvedScale> {
        let role = match axis.role {
            crate::guides::AxisRole::X => Role::PosX,
            crate::guides::AxisRole::Y => Role::PosY,
        };
        match &axis.source {
            AxisSource::Scale(name) => {
                let idx = *self.scale_index.get(name)?;
                let mut scale = self.resolve_scale(idx, role, path)?;
                if let Some(f) = axis.transform {
                    match self.transformed_axis_domain(idx, f, path) {
                        Some((d0, d1)) => {
                            let def = self.tree.scales[idx].clone();
                            let range = scale.numeric_range().unwrap_or((0.0, 1.0));
                            let mut warnings = Vec::new();
                            match ResolvedScale::quantitative(
                                def.kind,
                                (d0, d1),
                                range,
                                def.exponent,
                                def.clamp,
                                &mut warnings,
                            ) {
                                Ok(s) => {
                                    self.warn_all(path, warnings);
                                    scale = s;
                                }
                                Err(e) => {
                                    self.error(path.to_string(), e.to_string());
                                    return None;
                                }
                            }
                        }
                        None => return None,
                    }
                }
                Some(scale)
            }
            AxisSource::Field { data, field } => {
                let table = match self.working.read(data) {
                    Ok(t) => t,
                    Err(e) => {
                        self.error(format!("{path}/data"), e.to_string());
                        return None;
                    }
                };
                self.field_scale(&table, field, axis.transform, role, path)
            }
        }
    }

    /// Extent of a scale's reference column after an axis transform.
    fn transformed_axis_domain(
        &mut self,
        idx: usize,
        f: VariableFn,
        path: &str,
    ) -> Option<(f64, f64)> {
        let def = self.tree.scales[idx].clone();
        let DomainSpec::Reference { data, field } = &def.domain else {
            self.error(
                format!("{path}/transform"),
                "axis transforms need a scale with a (data, field) domain",
            );
            return None;
        };
        let table = self.working.read(data).ok()?;
        match transformed_extent(&table, field, Some(f)) {
            Ok(extent) => Some(extent),
            Err(e) => {
                self.error(format!("{path}/transform"), e);
                None
            }
        }
    }

    /// Default scale for an axis or parallel axis bound straight to a
    /// dataset field: linear over the (transformed) extent for numbers,
    /// band over the distinct values otherwise.
    fn field_scale(
        &mut self,
        table: &DataTable,
        field: &str,
        transform: Option<VariableFn>,
        role: Role,
        path: &str,
    ) -> Option<ResolvedScale> {
        let Some(ty) = table.column_type(field) else {
            self.error(format!("{path}/field"), format!("unknown field {field:?}"));
            return None;
        };
        let range = if self.tree.axes.coord.is_parallel() {
            (0.0, 1.0)
        } else {
            self.positional_range(role, None)
        };
        if ty == ColumnType::Number {
            match transformed_extent(table, field, transform) {
                Ok(extent) => {
                    let mut warnings = Vec::new();
                    let scale = ResolvedScale::quantitative(
                        ScaleKind::Linear,
                        extent,
                        range,
                        1.0,
                        false,
                        &mut warnings,
                    );
                    self.warn_all(path, warnings);
                    match scale {
                        Ok(s) => Some(s),
                        Err(e) => {
                            self.error(path.to_string(), e.to_string());
                            None
                        }
                    }
                }
                Err(e) => {
                    self.error(format!("{path}/field"), e);
                    None
                }
            }
        } else {
            let domain = table.distinct_values(field).ok()?;
            if domain.is_empty() {
                self.error(format!("{path}/field"), format!("field {field:?} has no values"));
                return None;
            }
            Some(ResolvedScale::OrdinalBand { domain, range })
        }
    }

    fn render_parallel(&mut self, scene: &mut SceneGraph) {
        let polar = self.tree.axes.coord == CoordKind::PolarParallel;
        let entries = self.tree.axes.entries.clone();
        let n = entries.len();
        let geoms = match parallel_axis_positions(&self.frame, n, polar, self.tree.axes.inset) {
            Ok(g) => g,
            Err(e) => {
                self.error(self.tree.axes.entry_path.clone(), e.to_string());
                return;
            }
        };

        // per-axis (table, field index, transform, resolved [0,1] scale)
        let mut columns: Vec<(usize, Option<VariableFn>, ResolvedScale)> = Vec::new();
        let mut table: Option<std::sync::Arc<DataTable>> = None;
        for (i, axis) in entries.iter().enumerate() {
            let path = format!("{}/{i}", self.tree.axes.entry_path);
            // error anchor: the data/field keys exist only for field-source
            // axes; scale-source diagnostics anchor on the entry itself
            let (data, field, anchor) = match &axis.source {
                AxisSource::Field { data, field } => {
                    (data.clone(), field.clone(), format!("{path}/field"))
                }
                AxisSource::Scale(name) => {
                    let Some(&idx) = self.scale_index.get(name) else { return };
                    match &self.tree.scales[idx].domain {
                        DomainSpec::Reference { data, field } => {
                            (data.clone(), field.clone(), format!("{path}/scale"))
                        }
                        _ => return, // link already rejected
                    }
                }
            };
            let t = match self.working.read(&data) {
                Ok(t) => t,
                Err(e) => {
                    self.error(anchor.clone(), e.to_string());
                    return;
                }
            };
            if table.is_none() {
                table = Some(t.clone());
            }
            let kind_override = match &axis.source {
                AxisSource::Scale(name) => {
                    self.scale_index.get(name).map(|&idx| self.tree.scales[idx].clone())
                }
                _ => None,
            };
            let scale =
                match self.parallel_axis_scale(&t, &field, axis, kind_override, &path, &anchor) {
                    Some(s) => s,
                    None => return,
                };
            let Some(fidx) = t.column_index(&field) else {
                self.error(anchor, format!("unknown field {field:?}"));
                return;
            };
            columns.push((fidx, axis.transform, scale));

            match render_parallel_axis(
                &geoms[i],
                &columns[i].2,
                axis.ticks,
                &axis.text,
                axis.annotation.as_ref(),
            ) {
                Ok(commands) => {
                    scene.commands.extend(commands);
                    self.order.push(format!("axis:{i}"));
                }
                Err(e) => {
                    self.error(path, e.to_string());
                    return;
                }
            }
        }

        let Some(table) = table else { return };
        let mut fractions: Vec<Vec<f64>> = Vec::new();
        let mut skipped = 0usize;
        for row in table.rows() {
            let mut fracs = Vec::with_capacity(n);
            let mut complete = true;
            for (fidx, transform, scale) in &columns {
                let value = &row[*fidx];
                let frac = match (value, transform) {
                    (DataValue::Null, _) => None,
                    (DataValue::Number(v), Some(f)) => f
                        .apply(*v)
                        .ok()
                        .and_then(|tv| scale.apply_number(tv).ok()),
                    (v, _) => scale.apply(v).ok().and_then(|s| s.as_number()),
                };
                match frac {
                    Some(f) => fracs.push(f),
                    None => {
                        complete = false;
                        break;
                    }
                }
            }
            if !complete {
                skipped += 1;
                continue;
            }
            match polyline_for_record(&fracs, &geoms, polar) {
                Ok(points) => {
                    scene.commands.push(RenderCommand::Path {
                        points,
                        closed: polar,
                        style: Style::stroked(palette_color(0), 1.0),
                    });
                    fractions.push(fracs);
                }
                Err(e) => {
                    self.error(self.tree.axes.entry_path.clone(), e.to_string());
                    return;
                }
            }
        }
        if skipped > 0 {
            self.warn_all(
                &self.tree.axes.entry_path.clone(),
                vec![format!("{skipped} record(s) skipped (null values)")],
            );
        }
        self.order.push("parallel-records".to_string());
        scene.record_fractions = Some(fractions);
    }

    /// `path` is the axis entry (field-source errors hang off its keys);
    /// `anchor` points at the key naming the source, for scale-level errors.
    fn parallel_axis_scale(
        &mut self,
        table: &DataTable,
        field: &str,
        axis: &AxisSpec,
        def: Option<crate::scales::ScaleDef>,
        path: &str,
        anchor: &str,
    ) -> Option<ResolvedScale> {
        match def {
            Some(def) if def.kind != ScaleKind::Ordinal => {
                match transformed_extent(table, field, axis.transform) {
                    Ok(extent) => {
                        let mut warnings = Vec::new();
                        let scale = ResolvedScale::quantitative(
                            def.kind,
                            extent,
                            (0.0, 1.0),
                            def.exponent,
                            false,
                            &mut warnings,
                        );
                        self.warn_all(anchor, warnings);
                        match scale {
                            Ok(s) => Some(s),
                            Err(e) => {
                                self.error(anchor.to_string(), e.to_string());
                                None
                            }
                        }
                    }
                    Err(e) => {
                        self.error(anchor.to_string(), e);
                        None
                    }
                }
            }
            Some(_) => {
                let domain = table.distinct_values(field).ok()?;
                Some(ResolvedScale::OrdinalBand { domain, range: (0.0, 1.0) })
            }
            None => self.field_scale(table, field, axis.transform, Role::PosY, path),
        }
    }

    fn render_geoms(&mut self, scene: &mut SceneGraph) {
        if self.tree.axes.coord.is_parallel() {
            return; // link rejects geoms under parallel coords
        }
        let coord = self.coord();
        for (i, geom) in self.tree.geoms.iter().cloned().enumerate() {
            let path = format!("/geom/{i}");
            let table = match self.working.read(&geom.data) {
                Ok(t) => t,
                Err(e) => {
                    self.error(format!("{path}/data"), e.to_string());
                    continue;
                }
            };
            let mut bindings = std::collections::BTreeMap::new();
            let mut ok = true;
            for (channel, spec) in &geom.bindings {
                match self.resolve_binding(*channel, spec, &table, &path) {
                    Some(b) => {
                        bindings.insert(*channel, b);
                    }
                    None => ok = false,
                }
            }
            if !ok {
                continue;
            }
            let input = GeomInput { table: &table, bindings, coords: &coord };
            let mut warnings = Vec::new();
            match render_geom(geom.kind, &input, geom.bins, &mut warnings) {
                Ok(commands) => {
                    scene.commands.extend(commands);
                    self.order.push(format!("geom:{i}"));
                }
                Err(e) => self.error(path.clone(), e.to_string()),
            }
            self.warn_all(&path, warnings);
        }
    }

    fn resolve_binding(
        &mut self,
        channel: Channel,
        spec: &BindingSpec,
        table: &DataTable,
        geom_path: &str,
    ) -> Option<ResolvedBinding> {
        let path = format!("{geom_path}/properties");
        let role = channel_role(channel);
        match spec {
            BindingSpec::ScaleName(name) => {
                let idx = *self.scale_index.get(name)?;
                let def = self.tree.scales[idx].clone();
                let DomainSpec::Reference { field, .. } = &def.domain else { return None };
                let Some(fidx) = table.column_index(field) else {
                    self.error(
                        path,
                        format!("scale {name:?} maps field {field:?}, absent from dataset {:?}", table.name()),
                    );
                    return None;
                };
                let scale = self.resolve_scale(idx, role, &path)?;
                Some(ResolvedBinding::Scaled { field: fidx, scale })
            }
            BindingSpec::Field { field, scale } => {
                let Some(fidx) = table.column_index(field) else {
                    self.error(
                        path,
                        format!("unknown field {field:?} in dataset {:?}", table.name()),
                    );
                    return None;
                };
                match scale {
                    Some(name) => {
                        let idx = *self.scale_index.get(name)?;
                        let scale = self.resolve_scale(idx, role, &path)?;
                        Some(ResolvedBinding::Scaled { field: fidx, scale })
                    }
                    None => Some(ResolvedBinding::Raw { field: fidx }),
                }
            }
            BindingSpec::Const { value, scale } => {
                let dv = match value {
                    ConstValue::Number(n) => DataValue::number(*n).unwrap_or(DataValue::Null),
                    ConstValue::Text(s) => DataValue::Text(s.clone()),
                };
                match scale {
                    Some(name) => {
                        let idx = *self.scale_index.get(name)?;
                        let scale = self.resolve_scale(idx, role, &path)?;
                        Some(ResolvedBinding::ScaledConst { value: dv, scale })
                    }
                    None => Some(match value {
                        ConstValue::Number(n) => ResolvedBinding::ConstNumber(*n),
                        ConstValue::Text(s) => ResolvedBinding::ConstText(s.clone()),
                    }),
                }
            }
        }
    }

    fn render_guides(&mut self, scene: &mut SceneGraph) {
        for (i, guide) in self.tree.guides.iter().cloned().enumerate() {
            let path = format!("/guides/{i}");
            let Some(&idx) = self.scale_index.get(&guide.scale) else { continue };
            let Some(scale) = self.resolve_scale(idx, Role::Legend, &path) else { continue };
            match render_legend(&guide, &scale, &self.frame) {
                Ok(commands) => {
                    scene.commands.extend(commands);
                    self.order.push(format!("guide:{i}"));
                }
                Err(e) => self.error(path, e.to_string()),
            }
        }
    }
}

/// Extent of a numeric column after an optional variable transform.
fn transformed_extent(
    table: &DataTable,
    field: &str,
    transform: Option<VariableFn>,
) -> Result<(f64, f64), String> {
    let values = table.numeric_values(field).map_err(|e| e.to_string())?;
    if values.is_empty() {
        return Err(format!("field {field:?} has no non-null values"));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        let t = match transform {
            Some(f) => f.apply(v).map_err(|e| e.to_string())?,
            None => v,
        };
        lo = lo.min(t);
        hi = hi.max(t);
    }
    Ok((lo, hi))
}
