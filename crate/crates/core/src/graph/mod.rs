//! The graph container, SCX (de)serialization, merging and closure fetching.

mod fetch;
mod scx;

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{Map, Value};

pub use fetch::{fetch_closure, fetch_closure_with, is_remote, FetchError, FetchPlan, Fetcher, FileFetcher};
pub use scx::{node_object, parse_manifest, serialize};

use crate::finding::{codes, Finding};
use crate::model::*;
use crate::uri::Uri;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("{origin}:{line}:{column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{origin}: duplicate id {id}")]
    DuplicateId { id: Uri, origin: String },
    #[error("conflicting {property} for {id} between {source_a} and {source_b}")]
    Conflict {
        id: Uri,
        property: String,
        source_a: String,
        source_b: String,
    },
    #[error("cannot load {origin}: {message}")]
    RootFetch { origin: String, message: String },
}

impl GraphError {
    pub fn code(&self) -> &'static str {
        match self {
            GraphError::Parse { .. } => "E_PARSE",
            GraphError::DuplicateId { .. } => "E_DUPLICATE_ID",
            GraphError::Conflict { .. } => codes::CONFLICT,
            GraphError::RootFetch { .. } => "E_FETCH_ROOT",
        }
    }

    /// Parse-level failures, as opposed to domain conflicts.
    pub fn is_parse_failure(&self) -> bool {
        matches!(
            self,
            GraphError::Parse { .. } | GraphError::DuplicateId { .. } | GraphError::RootFetch { .. }
        )
    }

    /// The error as a finding line, e.g. for merge conflicts in validation reports.
    pub fn to_finding(&self) -> Finding {
        let subject = match self {
            GraphError::Parse { origin, .. } | GraphError::RootFetch { origin, .. } => origin.clone(),
            GraphError::DuplicateId { id, .. } | GraphError::Conflict { id, .. } => id.to_string(),
        };
        Finding::error(self.code(), subject, self.to_string())
    }
}

/// A set of typed nodes keyed by id, with the sources each was loaded from.
///
/// Nodes are held in id order, which is also the document order used for
/// stacking painted annotations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Graph {
    nodes: BTreeMap<Uri, Node>,
    provenance: BTreeMap<Uri, BTreeSet<String>>,
    diagnostics: Vec<Finding>,
}

macro_rules! typed_getter {
    ($name:ident, $variant:ident, $ty:ty) => {
        pub fn $name(&self, id: &str) -> Option<&$ty> {
            match self.nodes.get(id).map(|n| &n.data) {
                Some(NodeData::$variant(v)) => Some(v),
                _ => None,
            }
        }
    };
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph from nodes all attributed to one source.
    pub fn from_nodes(nodes: impl IntoIterator<Item = Node>, origin: &str) -> Result<Self, GraphError> {
        let mut g = Graph::new();
        for node in nodes {
            g.insert(node, origin)?;
        }
        Ok(g)
    }

    pub fn insert(&mut self, node: Node, origin: &str) -> Result<(), GraphError> {
        if self.nodes.contains_key(&node.id) {
            return Err(GraphError::DuplicateId {
                id: node.id,
                origin: origin.to_string(),
            });
        }
        self.provenance
            .entry(node.id.clone())
            .or_default()
            .insert(origin.to_string());
        self.nodes.insert(node.id.clone(), node);
        Ok(())
    }

    /// Replaces (or adds) a node, keeping its provenance. Used to derive edited graphs.
    pub fn replace(&mut self, node: Node) {
        self.provenance.entry(node.id.clone()).or_default();
        self.nodes.insert(node.id.clone(), node);
    }

    pub fn remove(&mut self, id: &str) -> Option<Node> {
        self.provenance.remove(id);
        self.nodes.remove(id)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.get(id)
    }

    /// Nodes in id order.
    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &Uri> {
        self.nodes.keys()
    }

    pub fn provenance(&self, id: &str) -> Option<&BTreeSet<String>> {
        self.provenance.get(id)
    }

    /// Every source any node came from.
    pub fn sources(&self) -> BTreeSet<String> {
        self.provenance.values().flatten().cloned().collect()
    }

    /// Warnings recorded while assembling the graph (failed discovery fetches).
    pub fn diagnostics(&self) -> &[Finding] {
        &self.diagnostics
    }

    pub fn push_diagnostic(&mut self, finding: Finding) {
        if !self.diagnostics.contains(&finding) {
            self.diagnostics.push(finding);
            self.diagnostics.sort();
        }
    }

    typed_getter!(canvas, Canvas, Canvas);
    typed_getter!(zone, Zone, Zone);
    typed_getter!(annotation, Annotation, Annotation);
    typed_getter!(constraint, Constraint, Constraint);
    typed_getter!(choice, Choice, Choice);
    typed_getter!(sequence, Sequence, Sequence);
    typed_getter!(range, Range, Range);
    typed_getter!(annotation_list, AnnotationList, AnnotationList);
    typed_getter!(layer, Layer, Layer);
    typed_getter!(manifest, Manifest, Manifest);
    typed_getter!(foreign, Foreign, Foreign);

    pub fn annotations(&self) -> impl Iterator<Item = (&Uri, &Annotation)> {
        self.nodes.iter().filter_map(|(id, n)| match &n.data {
            NodeData::Annotation(a) => Some((id, a)),
            _ => None,
        })
    }

    pub fn layers(&self) -> impl Iterator<Item = (&Uri, &Layer)> {
        self.nodes.iter().filter_map(|(id, n)| match &n.data {
            NodeData::Layer(l) => Some((id, l)),
            _ => None,
        })
    }

    pub fn manifests(&self) -> impl Iterator<Item = (&Uri, &Manifest)> {
        self.nodes.iter().filter_map(|(id, n)| match &n.data {
            NodeData::Manifest(m) => Some((id, m)),
            _ => None,
        })
    }

    fn first_source(&self, id: &str) -> String {
        self.provenance
            .get(id)
            .and_then(|s| s.iter().next().cloned())
            .unwrap_or_else(|| "<memory>".to_string())
    }

    /// Folds `other` into `self` under the merge rules: identical nodes
    /// collapse, any differing property is a conflict.
    pub fn merge_from(&mut self, other: Graph) -> Result<(), GraphError> {
        for (id, node) in &other.nodes {
            if let Some(existing) = self.nodes.get(id) {
                if existing != node {
                    return Err(GraphError::Conflict {
                        id: id.clone(),
                        property: conflicting_property(existing, node),
                        source_a: self.first_source(id.as_str()),
                        source_b: other.first_source(id.as_str()),
                    });
                }
            }
        }
        let Graph {
            nodes,
            provenance,
            diagnostics,
        } = other;
        for (id, node) in nodes {
            self.nodes.entry(id).or_insert(node);
        }
        for (id, sources) in provenance {
            self.provenance.entry(id).or_default().extend(sources);
        }
        for d in diagnostics {
            self.push_diagnostic(d);
        }
        Ok(())
    }

    /// First structural difference with `other`, ignoring provenance and
    /// diagnostics. `None` means the node sets are equal.
    pub fn first_difference(&self, other: &Graph) -> Option<String> {
        for id in self.nodes.keys().chain(other.nodes.keys()) {
            match (self.nodes.get(id), other.nodes.get(id)) {
                (Some(a), Some(b)) if a != b => {
                    return Some(format!("{id}: property {} differs", conflicting_property(a, b)));
                }
                (Some(_), None) => return Some(format!("{id}: missing on the right")),
                (None, Some(_)) => return Some(format!("{id}: missing on the left")),
                _ => {}
            }
        }
        None
    }

    pub fn same_structure(&self, other: &Graph) -> bool {
        self.nodes == other.nodes
    }
}

/// Merges graphs left to right.
pub fn merge(graphs: impl IntoIterator<Item = Graph>) -> Result<Graph, GraphError> {
    let mut out = Graph::new();
    for g in graphs {
        out.merge_from(g)?;
    }
    Ok(out)
}

fn conflicting_property(a: &Node, b: &Node) -> String {
    if a.type_name() != b.type_name() {
        return "type".to_string();
    }
    let oa = node_object(a);
    let ob = node_object(b);
    first_differing_key(&oa, &ob).unwrap_or_else(|| "value".to_string())
}

fn first_differing_key(a: &Map<String, Value>, b: &Map<String, Value>) -> Option<String> {
    a.keys()
        .chain(b.keys().filter(|k| !a.contains_key(*k)))
        .find(|k| a.get(*k) != b.get(*k))
        .cloned()
}
