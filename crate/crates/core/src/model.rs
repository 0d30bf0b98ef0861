//! Typed nodes of the canvas and annotation model.
//!
//! Each payload struct serializes to the SCX key layout for its node type, in
//! the documented key order. The `id` and `type` keys live on [`Node`].

use std::collections::BTreeMap;
use std::fmt;

use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::uri::Uri;

pub mod type_names {
    pub const CANVAS: &str = "Canvas";
    pub const ZONE: &str = "Zone";
    pub const ANNOTATION: &str = "Annotation";
    pub const CONSTRAINT: &str = "Constraint";
    pub const CHOICE: &str = "Choice";
    pub const SEQUENCE: &str = "Sequence";
    pub const RANGE: &str = "Range";
    pub const ANNOTATION_LIST: &str = "AnnotationList";
    pub const LAYER: &str = "Layer";
    pub const MANIFEST: &str = "Manifest";
}

/// Writes integral values without a fractional part so `800` stays `800`.
pub(crate) fn ser_real<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.fract() == 0.0 && v.abs() < 9.0e15 {
        s.serialize_i64(*v as i64)
    } else {
        s.serialize_f64(*v)
    }
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

/// An abstract page-space. Origin top-left, x rightward, y downward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Canvas {
    #[serde(serialize_with = "ser_real")]
    pub height: f64,
    #[serde(serialize_with = "ser_real")]
    pub width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// A canvas-like space without page semantics; placed by zone annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct Zone {
    #[serde(serialize_with = "ser_real")]
    pub height: f64,
    #[serde(serialize_with = "ser_real")]
    pub width: f64,
    /// Degrees clockwise that bring the content to reading orientation.
    #[serde(default, serialize_with = "ser_real", skip_serializing_if = "is_zero")]
    pub reading_angle: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnotationKind {
    Image,
    Text,
    Audio,
    Zone,
    Comment,
    Semantic,
    Generic,
}

impl AnnotationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AnnotationKind::Image => "image",
            AnnotationKind::Text => "text",
            AnnotationKind::Audio => "audio",
            AnnotationKind::Zone => "zone",
            AnnotationKind::Comment => "comment",
            AnnotationKind::Semantic => "semantic",
            AnnotationKind::Generic => "generic",
        }
    }
}

/// A body or target: a resource, optionally narrowed by a constraint.
///
/// With a constraint present this is a constrained body/target and `id`
/// names the segment itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceRef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<Uri>,
    pub resource: Uri,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<Uri>,
}

impl ResourceRef {
    pub fn whole(resource: Uri) -> Self {
        ResourceRef {
            id: None,
            resource,
            constraint: None,
        }
    }

    pub fn constrained(id: Uri, resource: Uri, constraint: Uri) -> Self {
        ResourceRef {
            id: Some(id),
            resource,
            constraint: Some(constraint),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Term {
    Uri(Uri),
    Literal(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Uri(u) => write!(f, "{u}"),
            Term::Literal(s) => write!(f, "{s:?}"),
        }
    }
}

/// An RDF-style statement carried as the body of a semantic annotation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SemanticStatement {
    pub subject: Uri,
    pub predicate: Uri,
    pub object: Term,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStatement {
    subject: Uri,
    predicate: Uri,
    object: Option<Uri>,
    literal: Option<String>,
}

impl<'de> Deserialize<'de> for SemanticStatement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawStatement::deserialize(d)?;
        let object = match (raw.object, raw.literal) {
            (Some(u), None) => Term::Uri(u),
            (None, Some(s)) => Term::Literal(s),
            _ => return Err(D::Error::custom("statement needs exactly one of `object` or `literal`")),
        };
        Ok(SemanticStatement {
            subject: raw.subject,
            predicate: raw.predicate,
            object,
        })
    }
}

impl Serialize for SemanticStatement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("subject", &self.subject)?;
        m.serialize_entry("predicate", &self.predicate)?;
        match &self.object {
            Term::Uri(u) => m.serialize_entry("object", u)?,
            Term::Literal(l) => m.serialize_entry("literal", l)?,
        }
        m.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Body {
    Resource(ResourceRef),
    /// Indirection through a Choice node.
    Choice(Uri),
    Statement(SemanticStatement),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBody {
    id: Option<Uri>,
    resource: Option<Uri>,
    constraint: Option<Uri>,
    choice: Option<Uri>,
    statement: Option<SemanticStatement>,
}

impl<'de> Deserialize<'de> for Body {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawBody::deserialize(d)?;
        match raw {
            RawBody {
                resource: Some(resource),
                choice: None,
                statement: None,
                id,
                constraint,
            } => Ok(Body::Resource(ResourceRef {
                id,
                resource,
                constraint,
            })),
            RawBody {
                choice: Some(choice),
                resource: None,
                statement: None,
                id: None,
                constraint: None,
            } => Ok(Body::Choice(choice)),
            RawBody {
                statement: Some(statement),
                resource: None,
                choice: None,
                id: None,
                constraint: None,
            } => Ok(Body::Statement(statement)),
            _ => Err(D::Error::custom(
                "body must be {resource[, id, constraint]}, {choice} or {statement}",
            )),
        }
    }
}

impl Serialize for Body {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Body::Resource(r) => r.serialize(s),
            Body::Choice(c) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("choice", c)?;
                m.end()
            }
            Body::Statement(st) => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("statement", st)?;
                m.end()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Annotation {
    pub kind: AnnotationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<Body>,
    #[serde(default)]
    pub targets: Vec<ResourceRef>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoxUnit {
    Pixel,
    Percent,
}

/// A reusable segment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", deny_unknown_fields)]
pub enum Constraint {
    #[serde(rename = "box")]
    Box {
        unit: BoxUnit,
        #[serde(serialize_with = "ser_real")]
        x: f64,
        #[serde(serialize_with = "ser_real")]
        y: f64,
        #[serde(serialize_with = "ser_real")]
        w: f64,
        #[serde(serialize_with = "ser_real")]
        h: f64,
    },
    #[serde(rename = "svg-path")]
    SvgPath { path: String },
    /// Character offset and length, counted in Unicode scalar values.
    #[serde(rename = "text-offset")]
    TextOffset { offset: u64, length: u64 },
}

impl Constraint {
    pub fn is_spatial(&self) -> bool {
        !matches!(self, Constraint::TextOffset { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChoiceKind {
    Text,
    Zone,
    Generic,
}

/// A set of alternatives whose first option is the default.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct Choice {
    pub choice_kind: ChoiceKind,
    #[serde(default)]
    pub options: Vec<Uri>,
}

impl Choice {
    pub fn default_option(&self) -> Option<&Uri> {
        self.options.first()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sequence {
    #[serde(default)]
    pub canvases: Vec<Uri>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Sequence {
    /// Whether `a` comes before `b` in this order. `None` if either is absent.
    pub fn precedes(&self, a: &Uri, b: &Uri) -> Option<bool> {
        let ia = self.canvases.iter().position(|c| c == a)?;
        let ib = self.canvases.iter().position(|c| c == b)?;
        Some(ia < ib)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    #[serde(default)]
    pub canvases: Vec<Uri>,
    pub sequence: Uri,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ListKind {
    Text,
    Image,
    Audio,
    Zone,
    Comment,
    Mixed,
}

impl ListKind {
    pub fn accepts(self, kind: AnnotationKind) -> bool {
        match self {
            ListKind::Mixed => true,
            ListKind::Text => kind == AnnotationKind::Text,
            ListKind::Image => kind == AnnotationKind::Image,
            ListKind::Audio => kind == AnnotationKind::Audio,
            ListKind::Zone => kind == AnnotationKind::Zone,
            ListKind::Comment => kind == AnnotationKind::Comment,
        }
    }
}

fn mixed() -> ListKind {
    ListKind::Mixed
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct AnnotationList {
    #[serde(default = "mixed")]
    pub list_kind: ListKind,
    #[serde(default)]
    pub annotations: Vec<Uri>,
}

/// Groups annotations (directly or through lists) that belong together.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layer {
    #[serde(default)]
    pub members: Vec<Uri>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub sequences: Vec<Uri>,
    #[serde(default)]
    pub discovery: Vec<Uri>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// A node of unrecognized type, kept verbatim.
#[derive(Debug, Clone, PartialEq)]
pub struct Foreign {
    pub type_name: String,
    pub properties: Map<String, Value>,
}

impl Foreign {
    /// Inline text content (`chars`), used for locally embedded text bodies.
    pub fn chars(&self) -> Option<&str> {
        self.properties.get("chars").and_then(Value::as_str)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeData {
    Canvas(Canvas),
    Zone(Zone),
    Annotation(Annotation),
    Constraint(Constraint),
    Choice(Choice),
    Sequence(Sequence),
    Range(Range),
    AnnotationList(AnnotationList),
    Layer(Layer),
    Manifest(Manifest),
    Foreign(Foreign),
}

impl NodeData {
    pub fn type_name(&self) -> &str {
        use type_names::*;
        match self {
            NodeData::Canvas(_) => CANVAS,
            NodeData::Zone(_) => ZONE,
            NodeData::Annotation(_) => ANNOTATION,
            NodeData::Constraint(_) => CONSTRAINT,
            NodeData::Choice(_) => CHOICE,
            NodeData::Sequence(_) => SEQUENCE,
            NodeData::Range(_) => RANGE,
            NodeData::AnnotationList(_) => ANNOTATION_LIST,
            NodeData::Layer(_) => LAYER,
            NodeData::Manifest(_) => MANIFEST,
            NodeData::Foreign(f) => &f.type_name,
        }
    }

    /// Manifests, sequences, annotation lists and layers: the node types the
    /// closure walk follows.
    pub fn is_aggregation(&self) -> bool {
        matches!(
            self,
            NodeData::Manifest(_) | NodeData::Sequence(_) | NodeData::AnnotationList(_) | NodeData::Layer(_)
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: Uri,
    pub data: NodeData,
}

impl Node {
    pub fn new(id: Uri, data: NodeData) -> Self {
        Node { id, data }
    }

    pub fn type_name(&self) -> &str {
        self.data.type_name()
    }
}

macro_rules! from_payload {
    ($($ty:ident),*) => {
        $(impl From<$ty> for NodeData {
            fn from(v: $ty) -> Self {
                NodeData::$ty(v)
            }
        })*
    };
}

from_payload!(Canvas, Zone, Annotation, Constraint, Choice, Sequence, Range, AnnotationList, Layer, Manifest, Foreign);
