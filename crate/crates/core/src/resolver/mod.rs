//! Presentation-level queries over a graph: canvas order, painting,
//! alignment, layer membership, text segments, semantic statements and
//! shared-constraint expansion.
//!
//! Everything here is a pure function of an immutable [`Graph`].

mod paint;

use std::collections::{BTreeMap, BTreeSet};

pub use paint::{
    align, align_painted, align_with, paint, AlignOutput, AlignmentHit, BodySegment, ChoiceSelection, ChoiceState,
    PaintOutput, PaintedAnnotation, MAX_ZONE_DEPTH,
};

use crate::finding::{codes, Finding};
use crate::geometry::{resolve_constraint, GeometryError, Polygon};
use crate::graph::Graph;
use crate::model::*;
use crate::uri::Uri;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ResolveError {
    #[error("{id} is not a {expected} in the graph")]
    UnknownNode { id: String, expected: &'static str },
    #[error("{option} is not an option of choice {choice}")]
    InvalidSelection { choice: String, option: String },
    #[error("query region: {0}")]
    EmptyRegion(GeometryError),
    #[error("minimum fraction {0} is outside [0, 1]")]
    FractionRange(f64),
    #[error("constraint {0} is not a text-offset constraint")]
    NotTextSegment(String),
    #[error("characters [{offset}, {end}) exceed text length {len}")]
    TextRange { offset: u64, end: u64, len: usize },
    #[error("constraint {0} has no spatial extent")]
    NotSpatial(String),
}

impl ResolveError {
    pub fn code(&self) -> &'static str {
        match self {
            ResolveError::UnknownNode { .. } => codes::UNKNOWN_NODE,
            ResolveError::InvalidSelection { .. } => codes::INVALID_SELECTION,
            ResolveError::EmptyRegion(_) => codes::EMPTY_REGION,
            ResolveError::FractionRange(_) => codes::FRACTION_RANGE,
            ResolveError::NotTextSegment(_) => codes::NOT_TEXT_SEGMENT,
            ResolveError::TextRange { .. } => codes::TEXT_RANGE,
            ResolveError::NotSpatial(_) => codes::NOT_SPATIAL,
        }
    }
}

fn unknown(id: &str, expected: &'static str) -> ResolveError {
    ResolveError::UnknownNode {
        id: id.to_string(),
        expected,
    }
}

/// The canvases of a sequence in their stored order.
pub fn canvas_order(graph: &Graph, sequence: &str) -> Result<Vec<Uri>, ResolveError> {
    graph
        .sequence(sequence)
        .map(|s| s.canvases.clone())
        .ok_or_else(|| unknown(sequence, type_names::SEQUENCE))
}

pub fn range_canvases(graph: &Graph, range: &str) -> Result<Vec<Uri>, ResolveError> {
    graph
        .range(range)
        .map(|r| r.canvases.clone())
        .ok_or_else(|| unknown(range, type_names::RANGE))
}

/// Which layers claim each annotation, directly or through an aggregated list.
#[derive(Debug, Clone, Default)]
pub struct LayerIndex {
    by_annotation: BTreeMap<Uri, BTreeSet<Uri>>,
}

impl LayerIndex {
    pub fn build(graph: &Graph) -> Self {
        let mut by_annotation: BTreeMap<Uri, BTreeSet<Uri>> = BTreeMap::new();
        for (layer_id, layer) in graph.layers() {
            for m in &layer.members {
                let listed = graph.annotation_list(m.as_str()).map(|l| l.annotations.as_slice());
                for a in listed.unwrap_or(std::slice::from_ref(m)) {
                    by_annotation.entry(a.clone()).or_default().insert(layer_id.clone());
                }
            }
        }
        LayerIndex { by_annotation }
    }

    /// First claiming layer by id, plus a warning when more than one claims it.
    pub fn layer_of(&self, annotation: &str) -> (Option<&Uri>, Option<Finding>) {
        let Some(layers) = self.by_annotation.get(annotation) else {
            return (None, None);
        };
        let first = layers.iter().next();
        let warning = (layers.len() > 1).then(|| {
            let names: Vec<&str> = layers.iter().map(Uri::as_str).collect();
            Finding::warning(
                codes::MULTIPLE_LAYERS,
                annotation,
                format!("claimed by layers {}; using {}", names.join(", "), names[0]),
            )
        });
        (first, warning)
    }
}

pub fn layer_of(graph: &Graph, annotation: &str) -> (Option<Uri>, Option<Finding>) {
    let index = LayerIndex::build(graph);
    let (layer, warning) = index.layer_of(annotation);
    (layer.cloned(), warning)
}

/// The characters of `full_text` selected by a constrained text reference.
/// Offsets count Unicode scalar values.
pub fn text_segment(graph: &Graph, reference: &ResourceRef, full_text: &str) -> Result<String, ResolveError> {
    let cid = reference
        .constraint
        .as_ref()
        .ok_or_else(|| ResolveError::NotTextSegment(reference.resource.to_string()))?;
    match graph.constraint(cid.as_str()) {
        Some(Constraint::TextOffset { offset, length }) => slice_chars(full_text, *offset, *length),
        Some(_) => Err(ResolveError::NotTextSegment(cid.to_string())),
        None => Err(unknown(cid.as_str(), type_names::CONSTRAINT)),
    }
}

pub(crate) fn slice_chars(text: &str, offset: u64, length: u64) -> Result<String, ResolveError> {
    let len = text.chars().count();
    let end = offset.saturating_add(length);
    if end > len as u64 {
        return Err(ResolveError::TextRange { offset, end, len });
    }
    Ok(text.chars().skip(offset as usize).take(length as usize).collect())
}

/// Statements about `subject` from semantic annotation bodies, by annotation id.
pub fn semantic_statements(graph: &Graph, subject: &str) -> Vec<SemanticStatement> {
    graph
        .annotations()
        .filter(|(_, a)| a.kind == AnnotationKind::Semantic)
        .filter_map(|(_, a)| match &a.body {
            Some(Body::Statement(s)) if s.subject.as_str() == subject => Some(s.clone()),
            _ => None,
        })
        .collect()
}

/// One application of a shared constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateUse {
    pub annotation: Uri,
    pub canvas: Uri,
    pub polygon: Polygon,
}

/// Every annotation target that references `constraint`, resolved against
/// the dimensions of the canvas (or zone) it targets.
pub fn expand_template(graph: &Graph, constraint: &str) -> Result<Vec<TemplateUse>, ResolveError> {
    let c = graph
        .constraint(constraint)
        .ok_or_else(|| unknown(constraint, type_names::CONSTRAINT))?;
    if !c.is_spatial() {
        return Err(ResolveError::NotSpatial(constraint.to_string()));
    }
    let mut out = Vec::new();
    for (id, a) in graph.annotations() {
        for t in &a.targets {
            if t.constraint.as_ref().map(Uri::as_str) != Some(constraint) {
                continue;
            }
            let dims = match graph.node(t.resource.as_str()).map(|n| &n.data) {
                Some(NodeData::Canvas(cv)) => (cv.width, cv.height),
                Some(NodeData::Zone(z)) => (z.width, z.height),
                _ => continue,
            };
            if let Ok(r) = resolve_constraint(c, dims.0, dims.1) {
                out.push(TemplateUse {
                    annotation: id.clone(),
                    canvas: t.resource.clone(),
                    polygon: r.polygon,
                });
            }
        }
    }
    Ok(out)
}
