//! The SCX interchange format.
//!
//! A UTF-8 JSON object `{"resources": [...]}` whose entries carry `id` and
//! `type` followed by the type-specific keys. Output is canonical: nodes sorted
//! by id, keys in the fixed per-type order, two-space indentation, `\n` line
//! endings and a trailing newline.

use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use super::{Graph, GraphError};
use crate::model::*;
use crate::uri::Uri;

struct Entry(Node);

fn typed<T: serde::de::DeserializeOwned>(id: &Uri, ty: &str, rest: Map<String, Value>) -> Result<T, String> {
    serde_json::from_value(Value::Object(rest)).map_err(|e| format!("{ty} {id}: {e}"))
}

impl<'de> Deserialize<'de> for Entry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let mut obj = Map::<String, Value>::deserialize(d)?;
        let id = match obj.shift_remove("id") {
            Some(Value::String(s)) => Uri::new(s).map_err(D::Error::custom)?,
            Some(_) => return Err(D::Error::custom("`id` must be a string")),
            None => return Err(D::Error::custom("resource without `id`")),
        };
        let ty = match obj.shift_remove("type") {
            Some(Value::String(s)) => s,
            Some(_) => return Err(D::Error::custom(format!("{id}: `type` must be a string"))),
            None => return Err(D::Error::custom(format!("{id}: resource without `type`"))),
        };
        use type_names::*;
        let data = match ty.as_str() {
            CANVAS => typed(&id, &ty, obj).map(NodeData::Canvas),
            ZONE => typed(&id, &ty, obj).map(NodeData::Zone),
            ANNOTATION => typed(&id, &ty, obj).map(NodeData::Annotation),
            CONSTRAINT => typed(&id, &ty, obj).map(NodeData::Constraint),
            CHOICE => typed(&id, &ty, obj).map(NodeData::Choice),
            SEQUENCE => typed(&id, &ty, obj).map(NodeData::Sequence),
            RANGE => typed(&id, &ty, obj).map(NodeData::Range),
            ANNOTATION_LIST => typed(&id, &ty, obj).map(NodeData::AnnotationList),
            LAYER => typed(&id, &ty, obj).map(NodeData::Layer),
            MANIFEST => typed(&id, &ty, obj).map(NodeData::Manifest),
            _ => Ok(NodeData::Foreign(Foreign {
                type_name: ty,
                properties: obj,
            })),
        }
        .map_err(D::Error::custom)?;
        Ok(Entry(Node::new(id, data)))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    resources: Vec<Entry>,
}

/// Parses one SCX document. Unknown `type`s become foreign nodes.
pub fn parse_manifest(bytes: &[u8], origin: &str) -> Result<Graph, GraphError> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let (line, column) = line_column(bytes, e.valid_up_to());
        GraphError::Parse {
            origin: origin.to_string(),
            line,
            column,
            message: format!("invalid UTF-8: {e}"),
        }
    })?;
    let doc: Document = serde_json::from_str(text).map_err(|e| GraphError::Parse {
        origin: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Graph::from_nodes(doc.resources.into_iter().map(|e| e.0), origin)
}

fn line_column(bytes: &[u8], offset: usize) -> (usize, usize) {
    let before = &bytes[..offset];
    let line = before.iter().filter(|b| **b == b'\n').count() + 1;
    let column = offset - before.iter().rposition(|b| *b == b'\n').map_or(0, |p| p + 1) + 1;
    (line, column)
}

fn payload_value<T: Serialize>(v: &T) -> Map<String, Value> {
    match serde_json::to_value(v) {
        Ok(Value::Object(m)) => m,
        _ => unreachable!("model payloads serialize to objects"),
    }
}

/// The SCX object for one node: `id`, `type`, then the type-specific keys.
pub fn node_object(node: &Node) -> Map<String, Value> {
    let mut out = Map::new();
    out.insert("id".into(), Value::String(node.id.to_string()));
    out.insert("type".into(), Value::String(node.type_name().to_string()));
    let rest = match &node.data {
        NodeData::Canvas(v) => payload_value(v),
        NodeData::Zone(v) => payload_value(v),
        NodeData::Annotation(v) => payload_value(v),
        NodeData::Constraint(v) => payload_value(v),
        NodeData::Choice(v) => payload_value(v),
        NodeData::Sequence(v) => payload_value(v),
        NodeData::Range(v) => payload_value(v),
        NodeData::AnnotationList(v) => payload_value(v),
        NodeData::Layer(v) => payload_value(v),
        NodeData::Manifest(v) => payload_value(v),
        NodeData::Foreign(f) => f.properties.clone(),
    };
    for (k, v) in rest {
        if k != "id" && k != "type" {
            out.insert(k, v);
        }
    }
    out
}

struct Out<'a>(&'a Graph);

impl Serialize for Out<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let resources: Vec<Map<String, Value>> = self.0.nodes().map(node_object).collect();
        let mut m = s.serialize_map(Some(1))?;
        m.serialize_entry("resources", &resources)?;
        m.end()
    }
}

/// Canonical SCX bytes for a graph.
pub fn serialize(graph: &Graph) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&Out(graph)).expect("graph values are always serializable");
    out.push(b'\n');
    out
}
