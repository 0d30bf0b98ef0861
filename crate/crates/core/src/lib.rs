//! Canvas-centric layout model for hand-written cultural heritage objects.
//!
//! A [`Graph`] holds typed nodes (canvases, zones, annotations, constraints,
//! choices and the ordered aggregations used for discovery). Graphs are read
//! from and written to the SCX interchange format, merged across sources and
//! closed over their aggregation references. The [`resolver`] turns a graph
//! into painted, canvas-frame geometry and answers alignment queries; the
//! [`geometry`] module carries the planar math underneath.
//!
//! The `parallel` feature (on by default) runs batch work such as whole-graph
//! validation, alignment scoring and closure fetching on rayon. Without it the
//! same entry points run sequentially.

pub mod exec;
pub mod finding;
pub mod geometry;
pub mod graph;
pub mod model;
pub mod resolver;
pub mod uri;
pub mod validate;

pub use exec::Execution;
pub use finding::{Finding, Severity};
pub use graph::{Graph, GraphError};
pub use model::*;
pub use uri::{InvalidUri, Uri};
pub use validate::{validate_graph, validate_graph_with, validate_node};
