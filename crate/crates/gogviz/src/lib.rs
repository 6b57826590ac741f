//! A grammar-of-graphics engine: compiles a declarative JSON visualization
//! specification plus tabular data into a deterministic SVG scene.
//!
//! The library is organized as the layers of the grammar:
//!
//! * [`datastore`] — load CSV/TSV/JSON datasets into a named registry
//! * [`transform`] — filter, group/aggregate, join/cross/nest, variable
//!   functions, generators, summary statistics
//! * [`scales`] — ordinal and quantitative (linear, log, power, quantile)
//!   mappings from data domains to visual ranges
//! * [`coords`] — cartesian, equal, flipped, polar, parallel, and polar
//!   parallel coordinate systems
//! * [`geometry`] — marks: point, line, area, bars, arcs, rules, text,
//!   pictures, symbols
//! * [`guides`] — axes (ticks, grid, labels, titles) and legends
//! * [`compiler`] — the four-phase pipeline: scan, parse, link, assemble
//! * [`svg`] — deterministic SVG 1.1 serialization of the scene graph
//!
//! The compiler is the front door:
//!
//! ```
//! use gogviz::compiler::{compile, MapResolver};
//!
//! let spec = r#"{
//!   "data": [{"name": "pts", "values": [{"x": 1, "y": 2}, {"x": 3, "y": 4}]}],
//!   "scales": [
//!     {"name": "xs", "type": "linear", "range": {"type": "range", "value": "width"},
//!      "domain": {"data": "pts", "field": "x"}},
//!     {"name": "ys", "type": "linear", "range": {"type": "range", "value": "height"},
//!      "domain": {"data": "pts", "field": "y"}}
//!   ],
//!   "geom": [{"type": "Point", "data": "pts", "properties": {"x": "xs", "y": "ys"}}]
//! }"#;
//! let out = compile(spec, &MapResolver::default());
//! assert!(out.scene.is_some());
//! ```

pub mod compiler;
pub mod coords;
pub mod datastore;
pub mod diag;
pub mod geometry;
pub mod guides;
pub mod scales;
pub mod scene;
pub mod svg;
pub mod transform;
pub mod value;

pub use compiler::{compile, CompileOutput};
pub use diag::{Diagnostic, Phase, Severity};
pub use scene::{RenderCommand, SceneGraph};
pub use value::{ColumnType, DataValue};
