//! The four-phase compiler: scan (validate raw JSON against the grammar's
//! rules), parse (typed tree, defaults filled), link (resolve and check
//! cross-layer references), assemble (execute layers into a scene graph).
//!
//! Compilation stops after the first phase that produced any error,
//! returning every diagnostic gathered so far. A phase collects all of its
//! errors before aborting, so one bad scale does not hide the next.

pub mod assemble;
pub mod link;
pub mod parse;
pub mod scan;

pub use link::{LinkGraph, NodeId};
pub use parse::{CoordKind, DataDef, DataFormat, DataSource, FilledDefault, SpecTree};

use crate::datastore::DataRegistry;
use crate::diag::{has_errors, Diagnostic, Phase};
use crate::scene::SceneGraph;
use serde_json::json;
use std::collections::HashMap;
use std::path::PathBuf;

/// Loads dataset bytes for `values` file references.
pub trait SourceResolver {
    fn load(&self, path: &str) -> Result<Vec<u8>, String>;
}

/// In-memory resolver for tests and embedded use.
#[derive(Debug, Clone, Default)]
pub struct MapResolver(pub HashMap<String, Vec<u8>>);

impl MapResolver {
    pub fn with(mut self, name: &str, bytes: impl Into<Vec<u8>>) -> Self {
        self.0.insert(name.to_string(), bytes.into());
        self
    }
}

impl SourceResolver for MapResolver {
    fn load(&self, path: &str) -> Result<Vec<u8>, String> {
        self.0
            .get(path)
            .cloned()
            .ok_or_else(|| format!("no such source {path:?}"))
    }
}

/// Resolves relative paths against a base directory.
#[derive(Debug, Clone)]
pub struct FsResolver {
    pub base: PathBuf,
}

impl SourceResolver for FsResolver {
    fn load(&self, path: &str) -> Result<Vec<u8>, String> {
        let p = PathBuf::from(path);
        let full = if p.is_absolute() { p } else { self.base.join(p) };
        std::fs::read(&full).map_err(|e| format!("{}: {e}", full.display()))
    }
}

/// A per-phase debug summary for the CLI's `--debug` surface.
#[derive(Debug, Clone)]
pub struct PhaseSummary {
    pub phase: Phase,
    pub detail: serde_json::Value,
}

/// Result of a compilation: the scene (when every phase succeeded), all
/// diagnostics, and phase summaries.
#[derive(Debug, Clone)]
pub struct CompileOutput {
    pub scene: Option<SceneGraph>,
    pub diagnostics: Vec<Diagnostic>,
    pub phases: Vec<PhaseSummary>,
}

impl CompileOutput {
    pub fn has_errors(&self) -> bool {
        has_errors(&self.diagnostics)
    }
}

/// Compiles a spec against an empty registry.
pub fn compile(spec_json: &str, resolver: &dyn SourceResolver) -> CompileOutput {
    compile_with_registry(spec_json, resolver, &DataRegistry::new())
}

/// Compiles a spec on a read-only snapshot of `base`, so spec datasets may
/// reference previously registered tables.
pub fn compile_with_registry(
    spec_json: &str,
    resolver: &dyn SourceResolver,
    base: &DataRegistry,
) -> CompileOutput {
    let mut diagnostics = Vec::new();
    let mut phases = Vec::new();

    let root: serde_json::Value = match serde_json::from_str(spec_json) {
        Ok(v) => v,
        Err(e) => {
            diagnostics.push(Diagnostic::error(Phase::Scan, "", format!("invalid JSON: {e}")));
            return CompileOutput { scene: None, diagnostics, phases };
        }
    };

    let scan_diags = scan::scan(&root);
    let scan_failed = has_errors(&scan_diags);
    phases.push(PhaseSummary {
        phase: Phase::Scan,
        detail: json!({
            "diagnostics": scan_diags.len(),
            "errors": scan_diags.iter().filter(|d| d.is_error()).count(),
        }),
    });
    diagnostics.extend(scan_diags);
    if scan_failed {
        return CompileOutput { scene: None, diagnostics, phases };
    }

    let tree = parse::parse(&root);
    phases.push(PhaseSummary {
        phase: Phase::Parse,
        detail: json!({
            "nodes": {
                "data": tree.data.len(),
                "transform": tree.transforms.len(),
                "scales": tree.scales.len(),
                "axes": tree.axes.entries.len(),
                "geom": tree.geoms.len(),
                "guides": tree.guides.len(),
            },
            "defaults_filled": tree.defaults.len(),
        }),
    });

    let snapshot = base.snapshot();
    let (graph, link_diags) = link::link(&tree, &snapshot);
    let link_failed = has_errors(&link_diags);
    phases.push(PhaseSummary {
        phase: Phase::Link,
        detail: json!({
            "nodes": graph.nodes.len(),
            "edges": graph.edges.len(),
        }),
    });
    diagnostics.extend(link_diags);
    if link_failed {
        return CompileOutput { scene: None, diagnostics, phases };
    }

    let (scene, assemble_diags) = assemble::assemble(&tree, &graph, &snapshot, resolver);
    diagnostics.extend(assemble_diags);
    phases.push(PhaseSummary {
        phase: Phase::Assemble,
        detail: json!({
            "execution_order": scene.as_ref().map(|s| s.execution_order.clone()).unwrap_or_default(),
            "commands": scene.as_ref().map(|s| s.commands.len()).unwrap_or(0),
        }),
    });
    CompileOutput { scene, diagnostics, phases }
}

/// Parse and link without executing: used by tests and the validate
/// surface to inspect the graph.
pub fn analyze(spec_json: &str, base: &DataRegistry) -> Result<(SpecTree, LinkGraph, Vec<Diagnostic>), Vec<Diagnostic>> {
    let root: serde_json::Value =
        serde_json::from_str(spec_json).map_err(|e| {
            vec![Diagnostic::error(Phase::Scan, "", format!("invalid JSON: {e}"))]
        })?;
    let scan_diags = scan::scan(&root);
    if has_errors(&scan_diags) {
        return Err(scan_diags);
    }
    let tree = parse::parse(&root);
    let (graph, link_diags) = link::link(&tree, base);
    let mut diags = scan_diags;
    diags.extend(link_diags);
    Ok((tree, graph, diags))
}
